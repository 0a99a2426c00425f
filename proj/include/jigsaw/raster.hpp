#pragma once

#include <span>
#include <vector>

#include "jigsaw/fragment.hpp"

namespace jigsaw {

inline constexpr double kDefaultCanvasScale = 0.5;

struct Placement {
  const Fragment* fragment = nullptr;
  RigidTransform2D pose;
};

// Number of canvas pixels covered by at least two opaque masks when all placements
// are rasterized at `canvas_scale` of source resolution.
long rasterize_and_overlap(std::span<const Placement> placements, double canvas_scale = kDefaultCanvasScale);

// Overlap of two placed fragments, converted to full-resolution pixels.
double pair_overlap_area(const Placement& a, const Placement& b, double canvas_scale = kDefaultCanvasScale);

// Overlap below this (full-resolution pixels) is seam contact, not intersection.
double seam_tolerance(long area_a, long area_b);

// Looser bound for poses derived by chaining edges around loops, where the
// closure residual lands on one seam.
double assembly_tolerance(long area_a, long area_b);

bool pair_intersects(const Placement& a, const Placement& b, double canvas_scale = kDefaultCanvasScale);

// True when any placement in `added` intersects any placement in `fixed`, or two
// placements of `added` intersect each other.
bool group_intersects(std::span<const Placement> fixed, std::span<const Placement> added,
                      double canvas_scale = kDefaultCanvasScale);

}  // namespace jigsaw
