#include "spatial_arena/image.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <charconv>
#include <cstring>
#include <fmt/format.h>

#include "spatial_arena/error.hpp"
#include "spatial_arena/rng.hpp"

namespace arena {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("bad image size {}x{}", width, height));
  }
  pixels_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

std::string to_ppm(const Image& img) {
  std::string out = fmt::format("P6\n{} {}\n255\n", img.width(), img.height());
  out.append(reinterpret_cast<const char*>(img.bytes().data()), img.bytes().size());
  return out;
}

Image from_ppm(std::string_view bytes) {
  auto bad = [] { return Error(ErrorCode::InvalidArgument, "malformed P6 image"); };
  std::size_t pos = 0;
  auto token = [&]() -> std::string_view {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  auto number = [&]() {
    const auto t = token();
    int v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size()) throw bad();
    return v;
  };
  if (token() != "P6") throw bad();
  const int w = number();
  const int h = number();
  if (number() != 255 || pos >= bytes.size()) throw bad();
  ++pos;  // single whitespace after maxval
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3;
  if (w <= 0 || h <= 0 || bytes.size() - pos != n) throw bad();
  Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = pos + (static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)) * 3;
      img.set(x, y, {static_cast<std::uint8_t>(bytes[i]), static_cast<std::uint8_t>(bytes[i + 1]),
                     static_cast<std::uint8_t>(bytes[i + 2])});
    }
  }
  return img;
}

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw Error(ErrorCode::InvalidArgument, "bad base64 length");
  std::string out(3 * text.size() / 4, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "bad base64 payload");
  // EVP_DecodeBlock counts padding bytes as output.
  std::size_t len = static_cast<std::size_t>(n);
  if (!text.empty() && text.back() == '=') --len;
  if (text.size() > 1 && text[text.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

std::string content_hash(const Image& img) {
  constexpr std::uint64_t prime = 0x100000001b3ULL;
  const std::uint64_t seed = fnv1a64(fmt::format("P6\n{} {}\n255\n", img.width(), img.height()));
  std::uint64_t lane[4] = {seed, mix64(seed ^ 1), mix64(seed ^ 2), mix64(seed ^ 3)};
  const auto& bytes = img.bytes();
  const std::size_t n = bytes.size();
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    for (int k = 0; k < 4; ++k) {
      std::uint64_t w;
      std::memcpy(&w, bytes.data() + i + 8 * k, 8);
      lane[k] = (lane[k] ^ w) * prime;
    }
  }
  std::uint64_t h = mix64(lane[0]) ^ mix64(lane[1] + 1) ^ mix64(lane[2] + 2) ^ mix64(lane[3] + 3);
  for (; i < n; ++i) h = (h ^ bytes[i]) * prime;
  return fmt::format("{:016x}", mix64(h ^ n));
}

}  // namespace arena
