#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace jigsaw {

struct Rgba {
  std::uint8_t r = 0, g = 0, b = 0, a = 0;
  friend bool operator==(const Rgba&, const Rgba&) = default;
};

struct Color3 {
  double r = 0, g = 0, b = 0;
};

double color_distance(const Color3& a, const Color3& b);
Color3 to_color(const Rgba& p);

// Row-major RGBA raster. Alpha 0 marks pixels outside a fragment.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<Rgba> pixels;

  Image() = default;
  Image(int w, int h, Rgba fill = {});

  bool empty() const { return width <= 0 || height <= 0; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  Rgba& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Rgba& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool opaque(int x, int y) const { return contains(x, y) && at(x, y).a != 0; }
  long opaque_count() const;

  friend bool operator==(const Image&, const Image&) = default;
};

// Lossless PNG (8-bit RGBA). Throws FormatError on any I/O or decode failure.
void write_png(const Image& image, const std::filesystem::path& path);
Image read_png(const std::filesystem::path& path);

// CRC-32 over the raw RGBA bytes, used by bundle manifests.
std::uint32_t raster_crc32(const Image& image);

}  // namespace jigsaw
