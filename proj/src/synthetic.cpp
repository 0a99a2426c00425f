#include "jigsaw/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "jigsaw/errors.hpp"
#include "jigsaw/random.hpp"

namespace jigsaw {
namespace {

struct Blob {
  double x, y, sigma;
  Color3 color;
};

struct Band {
  double nx, ny, offset, width;
  Color3 shift;
};

Color3 random_color(Rng& rng, double lo, double hi) { return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)}; }

}  // namespace

Image synthetic_image(int width, int height, std::uint64_t seed) {
  if (width <= 0 || height <= 0) throw InvalidInput("synthetic image needs a positive size");
  Rng rng(seed);
  const Color3 c0 = random_color(rng, 30, 220), c1 = random_color(rng, 30, 220);
  const double ga = rng.uniform(0, 2 * std::numbers::pi);
  const double gx = std::cos(ga), gy = std::sin(ga);
  const double span = std::abs(gx) * width + std::abs(gy) * height;

  std::vector<Blob> blobs(10);
  for (auto& b : blobs) {
    b = {rng.uniform(0, width), rng.uniform(0, height), rng.uniform(25, 110), random_color(rng, -110, 110)};
  }
  std::vector<Band> bands(4);
  for (auto& b : bands) {
    const double a = rng.uniform(0, 2 * std::numbers::pi);
    b = {std::cos(a), std::sin(a), 0, rng.uniform(8, 35), random_color(rng, -80, 80)};
    b.offset = b.nx * rng.uniform(0, width) + b.ny * rng.uniform(0, height);
  }

  Image img(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double t = ((x - width / 2.0) * gx + (y - height / 2.0) * gy) / span + 0.5;
      Color3 c{c0.r + (c1.r - c0.r) * t, c0.g + (c1.g - c0.g) * t, c0.b + (c1.b - c0.b) * t};
      for (const auto& b : blobs) {
        const double d2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
        const double k = std::exp(-d2 / (2 * b.sigma * b.sigma));
        c.r += k * b.color.r;
        c.g += k * b.color.g;
        c.b += k * b.color.b;
      }
      for (const auto& b : bands)
        if (std::abs(x * b.nx + y * b.ny - b.offset) < b.width / 2) {
          c.r += b.shift.r;
          c.g += b.shift.g;
          c.b += b.shift.b;
        }
      auto px = [&](double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v + rng.uniform(-3, 3)), 0L, 255L)); };
      img.at(x, y) = {px(c.r), px(c.g), px(c.b), 255};
    }
  return img;
}

}  // namespace jigsaw
