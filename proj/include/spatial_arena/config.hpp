#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "spatial_arena/json_io.hpp"

namespace arena {

std::string sha256_hex(std::string_view bytes);
/// SHA-256 of the canonical serialization of `config`.
std::string config_hash(const Json& config);

/// Converts TOML text to JSON (tables become objects). Throws Error{InvalidArgument}.
Json toml_to_json(std::string_view text);
/// Reads a .toml or .json config file. Throws Error{Io} if unreadable.
Json load_config_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename. Throws Error{Io}.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace arena
