#pragma once

#include "jigsaw/composition.hpp"
#include "jigsaw/image.hpp"

namespace jigsaw {

// Composites every posed fragment onto one canvas (nearest neighbour, lower id on
// top). Fragments without a pose are left out. With `seams`, contours are drawn
// as 1-px black outlines.
Image render_assembly(std::span<const Fragment> fragments, const Poses& poses, bool seams = false);

}  // namespace jigsaw
