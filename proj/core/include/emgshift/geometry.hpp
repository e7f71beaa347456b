#pragma once

#include <array>

namespace emgshift::geom {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
};

double dot(const Vec3& a, const Vec3& b);
Vec3 cross(const Vec3& a, const Vec3& b);
double norm(const Vec3& a);
Vec3 normalized(const Vec3& a);

// Row-major 3x3.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  double& at(int r, int c) { return m[static_cast<std::size_t>(r) * 3 + c]; }
  double at(int r, int c) const { return m[static_cast<std::size_t>(r) * 3 + c]; }

  static Mat3 identity() { return {}; }
  Mat3 transposed() const;
  Vec3 col(int c) const { return {at(0, c), at(1, c), at(2, c)}; }
  Vec3 row(int r) const { return {at(r, 0), at(r, 1), at(r, 2)}; }
};

Mat3 operator*(const Mat3& a, const Mat3& b);
Vec3 operator*(const Mat3& a, const Vec3& v);

double det(const Mat3& a);

Mat3 roll(double theta_x);
Mat3 pitch(double theta_y);
Mat3 yaw(double theta_z);

// Yaw(tz) * Pitch(ty) * Roll(tx).
Mat3 rot(double theta_x, double theta_y, double theta_z);

// Arrow triple plus origin of a measured frame.
struct Frame3 {
  Vec3 x_arrow{1, 0, 0};
  Vec3 y_arrow{0, 1, 0};
  Vec3 z_arrow{0, 0, 1};
  Vec3 origin{0, 0, 0};
};

// Orthonormalizes the arrows preserving the x direction, in the order x-y,
// x-z, y-z. Throws on near-degenerate input.
Frame3 gram_schmidt(const Frame3& frame);

struct RigidTransform {
  Mat3 rotation;
  Vec3 translation;

  Vec3 apply(const Vec3& p) const;
  RigidTransform inverse() const;
};

// Rotation mapping the orthonormalized arrows onto the canonical basis with
// the origin going to zero. Rejects left-handed frames (no proper rotation
// exists for them).
RigidTransform alignment_transform(const Frame3& frame);

// Same rotation built from the sequential per-axis alignment rotations
// (x, then y, then z residual); used as a cross-check of the transpose
// construction.
Mat3 sequential_alignment_rotation(const Frame3& orthonormal_frame);

}  // namespace emgshift::geom
