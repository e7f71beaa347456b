#include "emgshift/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace emgshift::geom {

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 normalized(const Vec3& a) {
  const double n = norm(a);
  if (n < 1e-12) throw std::invalid_argument("normalized: zero vector");
  return a * (1.0 / n);
}

Mat3 Mat3::transposed() const {
  Mat3 t;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) t.at(r, c) = at(c, r);
  return t;
}

Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += a.at(r, k) * b.at(k, c);
      out.at(r, c) = s;
    }
  return out;
}

Vec3 operator*(const Mat3& a, const Vec3& v) {
  return {a.at(0, 0) * v.x + a.at(0, 1) * v.y + a.at(0, 2) * v.z,
          a.at(1, 0) * v.x + a.at(1, 1) * v.y + a.at(1, 2) * v.z,
          a.at(2, 0) * v.x + a.at(2, 1) * v.y + a.at(2, 2) * v.z};
}

double det(const Mat3& a) {
  return a.at(0, 0) * (a.at(1, 1) * a.at(2, 2) - a.at(1, 2) * a.at(2, 1)) -
         a.at(0, 1) * (a.at(1, 0) * a.at(2, 2) - a.at(1, 2) * a.at(2, 0)) +
         a.at(0, 2) * (a.at(1, 0) * a.at(2, 1) - a.at(1, 1) * a.at(2, 0));
}

Mat3 roll(double t) {
  Mat3 r;
  r.m = {1, 0, 0, 0, std::cos(t), -std::sin(t), 0, std::sin(t), std::cos(t)};
  return r;
}

Mat3 pitch(double t) {
  Mat3 r;
  r.m = {std::cos(t), 0, std::sin(t), 0, 1, 0, -std::sin(t), 0, std::cos(t)};
  return r;
}

Mat3 yaw(double t) {
  Mat3 r;
  r.m = {std::cos(t), -std::sin(t), 0, std::sin(t), std::cos(t), 0, 0, 0, 1};
  return r;
}

Mat3 rot(double theta_x, double theta_y, double theta_z) {
  return yaw(theta_z) * pitch(theta_y) * roll(theta_x);
}

Frame3 gram_schmidt(const Frame3& frame) {
  const double scale = std::max({norm(frame.x_arrow), norm(frame.y_arrow), norm(frame.z_arrow)});
  if (scale < 1e-12) throw std::invalid_argument("gram_schmidt: zero arrows");

  Frame3 out = frame;
  out.x_arrow = normalized(frame.x_arrow);
  Vec3 y = frame.y_arrow - out.x_arrow * dot(frame.y_arrow, out.x_arrow);
  if (norm(y) < 1e-9 * scale)
    throw std::invalid_argument("gram_schmidt: x and y arrows are near-parallel");
  out.y_arrow = normalized(y);
  Vec3 z = frame.z_arrow - out.x_arrow * dot(frame.z_arrow, out.x_arrow);
  z = z - out.y_arrow * dot(z, out.y_arrow);
  if (norm(z) < 1e-9 * scale)
    throw std::invalid_argument("gram_schmidt: z arrow is near-coplanar with x and y");
  out.z_arrow = normalized(z);
  return out;
}

Vec3 RigidTransform::apply(const Vec3& p) const { return rotation * p + translation; }

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transposed();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

RigidTransform alignment_transform(const Frame3& frame) {
  const Frame3 f = gram_schmidt(frame);
  Mat3 basis;  // columns are the orthonormal arrows
  for (int r = 0; r < 3; ++r) {
    basis.at(r, 0) = (r == 0) ? f.x_arrow.x : (r == 1 ? f.x_arrow.y : f.x_arrow.z);
    basis.at(r, 1) = (r == 0) ? f.y_arrow.x : (r == 1 ? f.y_arrow.y : f.y_arrow.z);
    basis.at(r, 2) = (r == 0) ? f.z_arrow.x : (r == 1 ? f.z_arrow.y : f.z_arrow.z);
  }
  if (det(basis) < 0.0)
    throw std::invalid_argument("alignment_transform: left-handed frame");

  RigidTransform tf;
  tf.rotation = basis.transposed();
  tf.translation = -(tf.rotation * f.origin);
  return tf;
}

Mat3 sequential_alignment_rotation(const Frame3& f) {
  // Columns of P track the arrows through the partial alignments.
  Mat3 p;
  for (int r = 0; r < 3; ++r) {
    p.at(r, 0) = (r == 0) ? f.x_arrow.x : (r == 1 ? f.x_arrow.y : f.x_arrow.z);
    p.at(r, 1) = (r == 0) ? f.y_arrow.x : (r == 1 ? f.y_arrow.y : f.y_arrow.z);
    p.at(r, 2) = (r == 0) ? f.z_arrow.x : (r == 1 ? f.z_arrow.y : f.z_arrow.z);
  }

  // x arrow onto e_x: pitch removes its z component, yaw its y component.
  const Vec3 xa = p.col(0);
  const double ty1 = std::atan2(xa.z, xa.x);
  const double tz1 = -std::atan2(xa.y, std::hypot(xa.x, xa.z));
  const Mat3 rx = rot(0.0, ty1, tz1);
  p = rx * p;

  // y arrow onto e_y: roll removes its z component, a residual yaw cleans up
  // the (numerically tiny) x component.
  const Vec3 ya = p.col(1);
  const double tx2 = -std::atan2(ya.z, ya.y);
  const Mat3 r_roll = rot(tx2, 0.0, 0.0);
  const Vec3 ya2 = r_roll * ya;
  const double tz2 = std::atan2(ya2.x, ya2.y);
  const Mat3 ry = rot(tx2, 0.0, tz2);
  p = ry * p;

  // z arrow onto e_z: residual roll and pitch (identity for an exactly
  // orthonormal right-handed frame).
  const Vec3 za = p.col(2);
  const double tx3 = std::atan2(za.y, za.z);
  const Mat3 r_roll3 = rot(tx3, 0.0, 0.0);
  const Vec3 za2 = r_roll3 * za;
  const double ty3 = -std::atan2(za2.x, za2.z);
  const Mat3 rz = rot(tx3, ty3, 0.0);

  return rz * ry * rx;
}

}  // namespace emgshift::geom
