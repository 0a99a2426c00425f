#pragma once

#include <cstdint>

#include "jigsaw/image.hpp"

namespace jigsaw {

// Procedural fully-opaque test image: smooth gradient, soft color blobs, a few
// hard-edged bands and light pixel noise. Deterministic in `seed`.
Image synthetic_image(int width, int height, std::uint64_t seed);

}  // namespace jigsaw
