#include "jigsaw/transform.hpp"

namespace jigsaw {

double wrap_angle(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(theta, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  if (r > std::numbers::pi) r -= two_pi;
  return r;
}

RigidTransform2D::RigidTransform2D(double theta, double tx, double ty)
    : theta_(wrap_angle(theta)), tx_(tx), ty_(ty), cos_(std::cos(theta_)), sin_(std::sin(theta_)) {}

RigidTransform2D RigidTransform2D::from_matrix(const std::array<double, 9>& m) {
  return {std::atan2(m[3] - m[1], m[0] + m[4]), m[2], m[5]};
}

RigidTransform2D RigidTransform2D::inverse() const {
  // R^T (-t)
  const double x = -(cos_ * tx_ + sin_ * ty_);
  const double y = -(-sin_ * tx_ + cos_ * ty_);
  return {-theta_, x, y};
}

std::array<double, 9> RigidTransform2D::matrix() const {
  return {cos_, -sin_, tx_, sin_, cos_, ty_, 0.0, 0.0, 1.0};
}

RigidTransform2D RigidTransform2D::operator*(const RigidTransform2D& rhs) const {
  const Point2 t = apply(rhs.translation_part());
  return {theta_ + rhs.theta_, t.x, t.y};
}

RigidTransform2D compose(const RigidTransform2D& a, const RigidTransform2D& b) { return a * b; }

RigidTransform2D invert(const RigidTransform2D& t) { return t.inverse(); }

std::array<double, 3> phi(const RigidTransform2D& t) { return {t.tx(), t.ty(), t.theta()}; }

PoseDifference pose_difference(const RigidTransform2D& a, const RigidTransform2D& b, const Point2& pivot) {
  return {std::abs(wrap_angle(a.theta() - b.theta())), (a.apply(pivot) - b.apply(pivot)).norm()};
}

}  // namespace jigsaw
