#pragma once

#include <cmath>
#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace smf {

// v = a + b*i + c*j over the trinion basis: i^2 = j, ij = ji = -1, j^2 = -i.
struct Trinion {
  double a = 0.0, b = 0.0, c = 0.0;

  constexpr Trinion() = default;
  constexpr Trinion(double a_, double b_ = 0.0, double c_ = 0.0) : a(a_), b(b_), c(c_) {}

  static constexpr int dim = 3;

  friend constexpr Trinion operator+(Trinion v, Trinion w) { return {v.a + w.a, v.b + w.b, v.c + w.c}; }
  friend constexpr Trinion operator-(Trinion v, Trinion w) { return {v.a - w.a, v.b - w.b, v.c - w.c}; }
  friend constexpr Trinion operator-(Trinion v) { return {-v.a, -v.b, -v.c}; }
  friend constexpr Trinion operator*(Trinion v, Trinion w) {
    return {v.a * w.a - v.b * w.c - v.c * w.b,
            v.a * w.b + v.b * w.a - v.c * w.c,
            v.a * w.c + v.c * w.a + v.b * w.b};
  }
  friend constexpr Trinion operator*(double s, Trinion v) { return {s * v.a, s * v.b, s * v.c}; }
  friend constexpr Trinion operator*(Trinion v, double s) { return s * v; }
  friend constexpr Trinion operator/(Trinion v, double s) { return {v.a / s, v.b / s, v.c / s}; }
  constexpr Trinion& operator+=(Trinion w) { return *this = *this + w; }
  constexpr Trinion& operator-=(Trinion w) { return *this = *this - w; }
  friend constexpr bool operator==(const Trinion&, const Trinion&) = default;

  // Left-multiplication matrix: (v*w) == A(v) * [w.a, w.b, w.c].
  Eigen::Matrix3d mult_matrix() const {
    Eigen::Matrix3d A;
    A << a, -c, -b,
         b,  a, -c,
         c,  b,  a;
    return A;
  }
  Eigen::Vector3d vec() const { return {a, b, c}; }
  static Trinion from_vec(const Eigen::Ref<const Eigen::VectorXd>& v) { return {v(0), v(1), v(2)}; }
};

// v* = a - b*j - c*i. Swaps the imaginary axes; an involutive ring automorphism.
constexpr Trinion conj(Trinion v) { return {v.a, -v.c, -v.b}; }
constexpr double norm2(Trinion v) { return v.a * v.a + v.b * v.b + v.c * v.c; }
inline double abs(Trinion v) { return std::sqrt(norm2(v)); }

inline constexpr double kTrinionDetThreshold = 1e-12;

// Solves A(v) w = e1. Trinions have zero divisors, so a (near) singular A is
// replaced by delta*I, which makes the result e1/delta.
inline Trinion inverse(Trinion v, double delta = 1e-12, double det_threshold = kTrinionDetThreshold) {
  Eigen::Matrix3d A = v.mult_matrix();
  if (std::abs(A.determinant()) <= det_threshold) A = delta * Eigen::Matrix3d::Identity();
  Eigen::Vector3d w = A.partialPivLu().solve(Eigen::Vector3d::UnitX());
  return {w(0), w(1), w(2)};
}

// q = a + b*i + c*j + d*k, Hamilton convention.
struct Quaternion {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  constexpr Quaternion() = default;
  constexpr Quaternion(double a_, double b_ = 0.0, double c_ = 0.0, double d_ = 0.0)
      : a(a_), b(b_), c(c_), d(d_) {}

  static constexpr int dim = 4;

  friend constexpr Quaternion operator+(Quaternion p, Quaternion q) {
    return {p.a + q.a, p.b + q.b, p.c + q.c, p.d + q.d};
  }
  friend constexpr Quaternion operator-(Quaternion p, Quaternion q) {
    return {p.a - q.a, p.b - q.b, p.c - q.c, p.d - q.d};
  }
  friend constexpr Quaternion operator-(Quaternion p) { return {-p.a, -p.b, -p.c, -p.d}; }
  friend constexpr Quaternion operator*(Quaternion p, Quaternion q) {
    return {p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
            p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
            p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
            p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a};
  }
  friend constexpr Quaternion operator*(double s, Quaternion q) { return {s * q.a, s * q.b, s * q.c, s * q.d}; }
  friend constexpr Quaternion operator*(Quaternion q, double s) { return s * q; }
  friend constexpr Quaternion operator/(Quaternion q, double s) { return {q.a / s, q.b / s, q.c / s, q.d / s}; }
  constexpr Quaternion& operator+=(Quaternion q) { return *this = *this + q; }
  constexpr Quaternion& operator-=(Quaternion q) { return *this = *this - q; }
  friend constexpr bool operator==(const Quaternion&, const Quaternion&) = default;

  Eigen::Matrix4d mult_matrix() const {
    Eigen::Matrix4d L;
    L << a, -b, -c, -d,
         b,  a, -d,  c,
         c,  d,  a, -b,
         d, -c,  b,  a;
    return L;
  }
  Eigen::Vector4d vec() const { return {a, b, c, d}; }
  static Quaternion from_vec(const Eigen::Ref<const Eigen::VectorXd>& v) { return {v(0), v(1), v(2), v(3)}; }
};

constexpr Quaternion conj(Quaternion q) { return {q.a, -q.b, -q.c, -q.d}; }
constexpr double norm2(Quaternion q) { return q.a * q.a + q.b * q.b + q.c * q.c + q.d * q.d; }
inline double abs(Quaternion q) { return std::sqrt(norm2(q)); }

inline Quaternion inverse(Quaternion q, double delta = 1e-12) {
  double n = norm2(q);
  if (n <= 0.0) return Quaternion{1.0 / delta};
  return conj(q) / n;
}

enum class Axis { i, j, k };

// q^i = -i q i and friends: keep the real part and the named axis, flip the rest.
constexpr Quaternion involution(Quaternion q, Axis axis) {
  switch (axis) {
    case Axis::i: return {q.a, q.b, -q.c, -q.d};
    case Axis::j: return {q.a, -q.b, q.c, -q.d};
    case Axis::k: return {q.a, -q.b, -q.c, q.d};
  }
  return q;
}

// Complex numbers over the j axis: z = x + y*j.
using JComplex = std::complex<double>;

// q = z1 + i*z2 with z1 = a + c*j, z2 = b + d*j.
constexpr std::pair<JComplex, JComplex> cayley_dickson_split(Quaternion q) {
  return {JComplex{q.a, q.c}, JComplex{q.b, q.d}};
}
constexpr Quaternion cayley_dickson_join(JComplex z1, JComplex z2) {
  return {z1.real(), z2.real(), z1.imag(), z2.imag()};
}

template <class T> inline constexpr bool is_hypercomplex_v = false;
template <> inline constexpr bool is_hypercomplex_v<Trinion> = true;
template <> inline constexpr bool is_hypercomplex_v<Quaternion> = true;

}  // namespace smf
