#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace jigsaw {

struct Point2 {
  double x = 0, y = 0;

  Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
  Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
  Point2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Point2& o) const { return x * o.x + y * o.y; }
  double cross(const Point2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
};

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Wraps an angle into (-pi, pi].
double wrap_angle(double theta);

// Element of SE(2): x' = R(theta) x + t. The angle is the stored quantity and the
// matrix is generated on demand.
class RigidTransform2D {
 public:
  RigidTransform2D() = default;
  RigidTransform2D(double theta, double tx, double ty);

  static RigidTransform2D identity() { return {}; }
  static RigidTransform2D rotation(double theta) { return {theta, 0.0, 0.0}; }
  static RigidTransform2D translation(double tx, double ty) { return {0.0, tx, ty}; }
  // Reads a row-major homogeneous 3x3 matrix; the rotation block is re-orthonormalised.
  static RigidTransform2D from_matrix(const std::array<double, 9>& m);

  double theta() const { return theta_; }
  double tx() const { return tx_; }
  double ty() const { return ty_; }
  Point2 translation_part() const { return {tx_, ty_}; }

  Point2 apply(const Point2& p) const { return rotate(p) + Point2{tx_, ty_}; }
  Point2 rotate(const Point2& v) const { return {cos_ * v.x - sin_ * v.y, sin_ * v.x + cos_ * v.y}; }
  RigidTransform2D inverse() const;
  std::array<double, 9> matrix() const;

  RigidTransform2D operator*(const RigidTransform2D& rhs) const;
  bool is_finite() const { return std::isfinite(theta_) && std::isfinite(tx_) && std::isfinite(ty_); }

 private:
  double theta_ = 0.0, tx_ = 0.0, ty_ = 0.0;
  double cos_ = 1.0, sin_ = 0.0;
};

// a * b: apply b first, then a.
RigidTransform2D compose(const RigidTransform2D& a, const RigidTransform2D& b);
RigidTransform2D invert(const RigidTransform2D& t);

// (tx, ty, theta); zero vector exactly when t is the identity.
std::array<double, 3> phi(const RigidTransform2D& t);

// Distance between two placements of the same rigid body: absolute wrapped angle
// difference and displacement of a pivot point (usually the body's centroid).
struct PoseDifference {
  double angle = 0;
  double distance = 0;
};
PoseDifference pose_difference(const RigidTransform2D& a, const RigidTransform2D& b, const Point2& pivot);

}  // namespace jigsaw
