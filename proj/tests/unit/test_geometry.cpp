#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "common.hpp"
#include "jigsaw/contour.hpp"
#include "jigsaw/errors.hpp"
#include "jigsaw/random.hpp"
#include "jigsaw/raster.hpp"
#include "oracles.hpp"

using namespace jigsaw;

namespace {

RigidTransform2D random_transform(Rng& rng) {
  return {rng.uniform(-std::numbers::pi, std::numbers::pi), rng.uniform(-500, 500), rng.uniform(-500, 500)};
}

void check_same(const RigidTransform2D& a, const oracle::Pose& b, double eps = 1e-9) {
  CHECK(std::abs(wrap_angle(a.theta() - b.th)) < eps);
  CHECK(a.tx() == doctest::Approx(b.x).epsilon(eps));
  CHECK(a.ty() == doctest::Approx(b.y).epsilon(eps));
}

// Axis-aligned square contour of side n starting at the origin, one point per pixel edge.
Contour square_contour(int n, const Color3& fill) {
  Contour c;
  for (int x = 0; x < n; ++x) c.points.push_back({double(x), 0});
  for (int y = 0; y < n; ++y) c.points.push_back({double(n), double(y)});
  for (int x = n; x > 0; --x) c.points.push_back({double(x), double(n)});
  for (int y = n; y > 0; --y) c.points.push_back({0, double(y)});
  c.colors.assign(c.points.size(), fill);
  return c;
}

Image square_raster(int n, Rgba fill, int margin = 1) {
  Image r(n + 2 * margin, n + 2 * margin);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) r.at(x + margin, y + margin) = fill;
  return r;
}

}  // namespace

TEST_CASE("transform: identity and quarter turns") {
  const auto id = compose(RigidTransform2D::identity(), RigidTransform2D::identity());
  CHECK(id.theta() == 0.0);
  CHECK(id.tx() == 0.0);
  CHECK(id.ty() == 0.0);
  const auto half = compose(RigidTransform2D::rotation(deg_to_rad(90)), RigidTransform2D::rotation(deg_to_rad(90)));
  CHECK(std::abs(std::abs(half.theta()) - std::numbers::pi) < 1e-12);
  CHECK(std::abs(half.tx()) < 1e-12);
  CHECK(std::abs(half.ty()) < 1e-12);
}

TEST_CASE("transform: inverse, associativity and matrix form against the oracle") {
  Rng rng(11);
  for (int n = 0; n < 1000; ++n) {
    const auto a = random_transform(rng), b = random_transform(rng), c = random_transform(rng);
    const auto e = compose(a, invert(a));
    CHECK(std::abs(wrap_angle(e.theta())) < 1e-9);
    CHECK(std::hypot(e.tx(), e.ty()) < 1e-6);
    const auto l = (a * b) * c, r = a * (b * c);
    CHECK(std::abs(wrap_angle(l.theta() - r.theta())) < 1e-9);
    CHECK(std::hypot(l.tx() - r.tx(), l.ty() - r.ty()) < 1e-6);
    check_same(a * b, oracle::compose(oracle::from(a), oracle::from(b)));
    check_same(a.inverse(), oracle::inverse(oracle::from(a)));
    const auto m = a.matrix();
    CHECK(m[6] == 0.0);
    CHECK(m[7] == 0.0);
    CHECK(m[8] == 1.0);
    CHECK(m[0] * m[0] + m[3] * m[3] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m[0] * m[1] + m[3] * m[4] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m[0] * m[4] - m[1] * m[3] == doctest::Approx(1.0).epsilon(1e-12));
    const auto back = RigidTransform2D::from_matrix(m);
    CHECK(std::abs(wrap_angle(back.theta() - a.theta())) < 1e-12);
  }
}

TEST_CASE("phi: identity, translation, and inversion") {
  const auto z = phi(RigidTransform2D::identity());
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);
  CHECK(z[2] == 0.0);
  const auto t = phi(RigidTransform2D::translation(3, -4));
  CHECK(t[0] == 3.0);
  CHECK(t[1] == -4.0);
  CHECK(t[2] == 0.0);

  auto negates = [](const RigidTransform2D& x) {
    const auto a = phi(invert(x)), b = phi(x);
    return std::abs(a[0] + b[0]) < 1e-9 && std::abs(a[1] + b[1]) < 1e-9 && std::abs(wrap_angle(a[2] + b[2])) < 1e-9;
  };
  CHECK(negates(RigidTransform2D::translation(7, 2)));
  CHECK(negates(RigidTransform2D::rotation(0.4)));
  Rng rng(5);
  for (int n = 0; n < 200; ++n) {
    const auto x = random_transform(rng);
    const auto want = oracle::phi(oracle::inverse(oracle::from(x)));
    const auto got = phi(invert(x));
    CHECK(got[0] == doctest::Approx(want[0]).epsilon(1e-9));
    CHECK(got[1] == doctest::Approx(want[1]).epsilon(1e-9));
    CHECK(std::abs(wrap_angle(got[2] - want[2])) < 1e-9);
    // a general rigid motion with both parts nonzero does not just flip sign
    CHECK_FALSE(negates(x));
  }
}

TEST_CASE("contour: traced square is valid and matches its area") {
  const Image r = square_raster(20, {200, 10, 10, 255});
  const Contour c = trace_contour(r);
  CHECK_NOTHROW(c.validate());
  CHECK(c.size() == 80);
  // crack midpoints cut each corner by a quarter-pixel triangle
  CHECK(c.signed_area() == doctest::Approx(20.0 * 20.0 - 0.5));
  Contour bad;
  bad.points = {{0, 0}, {1, 0}};
  bad.colors.resize(2);
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  CHECK_THROWS_AS(trace_contour(Image(5, 5)), InvalidInput);
}

TEST_CASE("rdp: square gives four segments") {
  const auto p = rdp_simplify(square_contour(20, {100, 100, 100}), 2.0, 40.0);
  CHECK(p.segments.size() == 4);
}

TEST_CASE("rdp: a two-colored edge splits where the exhaustive oracle splits") {
  Contour c = square_contour(20, {220, 30, 30});
  for (int k = 10; k < 20; ++k) c.colors[k] = {30, 30, 220};
  const auto p = rdp_simplify(c, 2.0, 40.0);
  REQUIRE(p.segments.size() == 5);
  std::set<int> cuts;
  for (const auto& s : p.segments) cuts.insert(s.start % 80);
  // the colored edge is the piece [0, 20) between two corners
  const std::vector<Color3> edge(c.colors.begin(), c.colors.begin() + 20);
  const int m = oracle::best_color_split(edge);
  CHECK(cuts == std::set<int>{0, m, 20, 40, 60});
  for (const auto& s : p.segments) CHECK(max_color_deviation(c, s.start, s.end) < 40.0);
}

TEST_CASE("rdp: larger eps never gives more segments on a noisy circle") {
  Rng rng(3);
  Contour c;
  for (int k = 0; k < 360; ++k) {
    const double a = deg_to_rad(k), r = 80 + rng.uniform(-1.5, 1.5);
    c.points.push_back({r * std::cos(a), r * std::sin(a)});
  }
  c.colors.assign(c.points.size(), {50, 50, 50});
  const auto fine = rdp_simplify(c, 1.0, 40.0), coarse = rdp_simplify(c, 10.0, 40.0);
  CHECK(coarse.segments.size() < fine.segments.size());
  for (const auto& s : coarse.segments)
    for (int k = s.start; k <= s.end; ++k)
      CHECK(point_segment_distance(c.points[k % 360], coarse.chord_start(c, s), coarse.chord_end(c, s)) <= 10.0 + 1e-9);
  Contour tiny;
  tiny.points = {{0, 0}, {1, 0}};
  tiny.colors.resize(2);
  CHECK_THROWS_AS(rdp_simplify(tiny, 1.0, 40.0), InvalidInput);
}

TEST_CASE("raster: disjoint, self and groundtruth overlap") {
  const Fragment a(0, square_raster(30, {10, 200, 10, 255}));
  const Placement p0{&a, RigidTransform2D::identity()};
  const Placement far{&a, RigidTransform2D::translation(100, 0)};
  const Placement both[] = {p0, far};
  CHECK(rasterize_and_overlap(both, 1.0) == 0);
  const Placement same[] = {p0, p0};
  const long self = rasterize_and_overlap(same, 1.0);
  CHECK(std::abs(self - a.area()) <= a.perimeter());
  CHECK(pair_intersects(p0, p0));
  CHECK_FALSE(pair_intersects(p0, far));

  const auto& b = testing::nine_piece();
  std::vector<Placement> gt;
  long total = 0;
  for (std::size_t v = 0; v < b.size(); ++v) {
    gt.push_back({&b.fragments[v], b.groundtruth[v]});
    total += b.fragments[v].area();
  }
  CHECK(rasterize_and_overlap(gt, 1.0) <= 0.002 * total);
  for (std::size_t u = 0; u < b.size(); ++u)
    for (std::size_t v = u + 1; v < b.size(); ++v) {
      CHECK(pair_overlap_area(gt[u], gt[v]) <= seam_tolerance(b.fragments[u].area(), b.fragments[v].area()));
      CHECK(pair_overlap_area(gt[u], gt[v]) <=
            oracle::overlap_pixels(b.fragments[u].raster(), oracle::from(b.groundtruth[u]), b.fragments[v].raster(),
                                   oracle::from(b.groundtruth[v])) + 30);
    }
}

TEST_CASE("raster: overlap of shifted copies agrees with the full-resolution oracle") {
  const auto& b = testing::nine_piece();
  Rng rng(9);
  for (int n = 0; n < 20; ++n) {
    const int u = static_cast<int>(rng.index(b.size()));
    const auto& f = b.fragments[u];
    const RigidTransform2D shift(rng.uniform(-0.3, 0.3), rng.uniform(-40, 40), rng.uniform(-40, 40));
    const Placement pa{&f, RigidTransform2D::identity()}, pb{&f, shift};
    const double approx = pair_overlap_area(pa, pb, 1.0);
    const double exact = static_cast<double>(oracle::overlap_pixels(f.raster(), {}, f.raster(), oracle::from(shift)));
    CHECK(std::abs(approx - exact) <= 0.02 * f.area() + f.perimeter());
  }
}
