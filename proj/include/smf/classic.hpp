#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "signals.hpp"

namespace smf {

struct OpCounts {
  long long mults = 0, adds = 0, divs = 0;
  OpCounts& operator+=(const OpCounts& o) {
    mults += o.mults;
    adds += o.adds;
    divs += o.divs;
    return *this;
  }
  friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

struct FilterState {
  Vec w;
  Mat S_D;  // RLS only
  Vec p_D;

  FilterState() = default;
  explicit FilterState(Vec w0) : w(std::move(w0)) {}
  static FilterState zeros(int N) { return FilterState(Vec::Zero(N + 1)); }
};

// Solves (A + delta I) y = b for symmetric A. If that system is numerically
// singular a tiny ridge is added and `flagged` is set.
inline Vec regularized_solve(const Mat& A, const Vec& b, double delta, bool* flagged = nullptr) {
  const auto n = A.rows();
  Mat M = A;
  M.diagonal().array() += delta;
  if (n == 1) {
    double m = M(0, 0);
    if (std::abs(m) > 1e-300 && std::isfinite(1.0 / m)) return b / m;
    if (flagged) *flagged = true;
    return b / (m + 1e-12);
  }
  Eigen::LDLT<Mat> ldlt(M);
  // LDLT's rcond misses exact zero pivots
  const Vec D = ldlt.vectorD().cwiseAbs();
  const bool pivots_ok = D.minCoeff() > 1e-15 * std::max(1.0, D.maxCoeff());
  if (ldlt.info() == Eigen::Success && pivots_ok && ldlt.rcond() > 1e-15) return ldlt.solve(b);
  if (flagged) *flagged = true;
  double scale = std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
  M.diagonal().array() += 1e-12 * scale;
  return M.partialPivLu().solve(b);
}

inline void check_state(const FilterState& s, const Vec& x) {
  if (s.w.size() != x.size()) throw std::invalid_argument("weight/regressor size mismatch");
}

// w' = w + 2 mu e x
inline double lms_step(FilterState& s, const Vec& x, double d, double mu) {
  check_state(s, x);
  const double e = d - s.w.dot(x);
  s.w += (2.0 * mu * e) * x;
  return e;
}

inline double nlms_step(FilterState& s, const Vec& x, double d, double mu_n, double delta = 1e-12) {
  check_state(s, x);
  const double e = d - s.w.dot(x);
  const double den = x.squaredNorm() + delta;
  if (den > 0.0) s.w += (mu_n * e / den) * x;
  return e;
}

inline Vec ap_step(FilterState& s, const RegressorWindow& win, double mu, double delta = 1e-12,
                   bool* flagged = nullptr) {
  check_state(s, win.X.col(0));
  Vec e = win.d - win.X.transpose() * s.w;
  if (mu != 0.0) {
    Vec y = regularized_solve(win.X.transpose() * win.X, e, delta, flagged);
    s.w += mu * (win.X * y);
  }
  return e;
}

// S_D(-1) = delta I with delta typically 1/sigma_x^2.
inline FilterState rls_init(int N, double delta) {
  FilterState s = FilterState::zeros(N);
  s.S_D = delta * Mat::Identity(N + 1, N + 1);
  s.p_D = Vec::Zero(N + 1);
  return s;
}

inline double rls_step(FilterState& s, const Vec& x, double d, double lambda) {
  check_state(s, x);
  const double e = d - s.w.dot(x);
  Vec Sx = s.S_D * x;
  const double den = lambda + x.dot(Sx);
  s.S_D = (s.S_D - (Sx * Sx.transpose()) / den) / lambda;
  s.S_D = 0.5 * (s.S_D + s.S_D.transpose());
  s.p_D = lambda * s.p_D + x * d;
  s.w = s.S_D * s.p_D;
  return e;
}

}  // namespace smf
