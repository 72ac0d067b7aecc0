#pragma once

#include <string>
#include <string_view>

#include "json.hpp"
#include "spatial_arena/geometry.hpp"
#include "spatial_arena/scene.hpp"

namespace arena {

using Json = nlohmann::ordered_json;

/// Serializes with keys in insertion order, no whitespace, and every
/// floating-point number written with exactly four decimals.
std::string canonical_dump(const Json& j);

/// Parses JSON text, mapping parse failures to Error{InvalidArgument}.
Json parse_json(std::string_view text);

Json to_json(Vec2 v);
Json to_json(Vec3 v);
Json to_json(const Rect& r);
Json to_json(const Box3& b);
Json to_json(const BBox2D& b);
Vec2 vec2_from_json(const Json& j);
Vec3 vec3_from_json(const Json& j);
Rect rect_from_json(const Json& j);
Box3 box3_from_json(const Json& j);
BBox2D bbox_from_json(const Json& j);

Json to_json(const Scene& scene);
Scene scene_from_json(const Json& j);

/// Canonical `.scene.json` document text.
std::string serialize_scene(const Scene& scene);
Scene deserialize_scene(std::string_view text);

Json to_json(const GeneratorProfile& p);
GeneratorProfile profile_from_json(const Json& j);

}  // namespace arena
