#include "jigsaw/image.hpp"

#include <zlib.h>

#include <cmath>

namespace jigsaw {

Image::Image(int w, int h, Rgba fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

long Image::opaque_count() const {
  long n = 0;
  for (const auto& p : pixels) n += p.a != 0;
  return n;
}

double color_distance(const Color3& a, const Color3& b) {
  return std::sqrt((a.r - b.r) * (a.r - b.r) + (a.g - b.g) * (a.g - b.g) + (a.b - b.b) * (a.b - b.b));
}

Color3 to_color(const Rgba& p) { return {double(p.r), double(p.g), double(p.b)}; }

std::uint32_t raster_crc32(const Image& image) {
  uLong crc = crc32(0L, Z_NULL, 0);
  const auto* bytes = reinterpret_cast<const Bytef*>(image.pixels.data());
  std::size_t remaining = image.pixels.size() * sizeof(Rgba);
  while (remaining > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(remaining, 1u << 30));
    crc = crc32(crc, bytes, chunk);
    bytes += chunk;
    remaining -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace jigsaw
