#pragma once

#include <cmath>
#include <deque>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "classic.hpp"

namespace smf {

inline bool sm_gate(double e_abs, double gammabar) { return e_abs > gammabar; }

inline double sgn(double v) { return (v > 0) - (v < 0); }

enum class CVKind { simple_choice, general, noise, zero };

struct CVPolicy {
  CVKind kind = CVKind::simple_choice;
  double c = 1.0;  // noise(c) scale

  static CVPolicy simple() { return {CVKind::simple_choice, 1.0}; }
  static CVPolicy general() { return {CVKind::general, 1.0}; }
  static CVPolicy noise(double c = 1.0) { return {CVKind::noise, c}; }
  static CVPolicy zero() { return {CVKind::zero, 1.0}; }
};

struct UpdateDecision {
  bool updated = false;
  double e = 0.0;       // a priori error (first entry of the window)
  double mu_eff = 0.0;  // 1 - gammabar/|e| on update
  Vec cv;
  OpCounts ops;
  bool regularized = false;  // the solve needed an extra ridge
  bool cv_out_of_bound = false;
  bool anomaly = false;  // gate fired but no update was possible
};

// e_vec holds e(k) followed by eps(k-1..k-L), all against the current w.
inline Vec make_cv(const CVPolicy& policy, const Vec& e_vec, const Vec* n_vec, double gammabar,
                   bool* out_of_bound = nullptr) {
  const auto n = e_vec.size();
  Vec cv(n);
  switch (policy.kind) {
    case CVKind::simple_choice:
      cv = e_vec;
      cv(0) = gammabar * sgn(e_vec(0));
      break;
    case CVKind::general: cv.setConstant(gammabar); break;
    case CVKind::zero: cv.setZero(); break;
    case CVKind::noise:
      if (!n_vec || n_vec->size() != n) throw std::invalid_argument("make_cv: noise policy needs the noise vector");
      cv = policy.c * *n_vec;
      if (out_of_bound && cv.cwiseAbs().maxCoeff() > gammabar) *out_of_bound = true;
      break;
  }
  return cv;
}

namespace detail {
// e = d - X^T w on (N+1) x (L+1) data.
inline OpCounts error_ops(long N, long L) { return {(L + 1) * (N + 1), (L + 1) * (N + 1), 0}; }
inline OpCounts ap_update_ops(long N, long L) {
  const long n = N + 1, m = L + 1;
  // Gram matrix, LDLT solve, X y, w += ...
  return {n * m * (m + 1) / 2 + m * m * m / 3 + m * m + n * m, n * m * (m + 1) / 2 + m * m * m / 3 + m * m + n * m,
          m};
}
}  // namespace detail

inline UpdateDecision smnlms_step(FilterState& s, const Vec& x, double d, double gammabar, double delta = 1e-12) {
  check_state(s, x);
  const long N = x.size() - 1;
  UpdateDecision dec;
  dec.e = d - s.w.dot(x);
  dec.ops = detail::error_ops(N, 0);
  const double ae = std::abs(dec.e);
  if (!sm_gate(ae, gammabar)) return dec;
  dec.updated = true;
  dec.mu_eff = 1.0 - gammabar / ae;
  const double den = x.squaredNorm() + delta;
  if (den > 0.0) s.w += (dec.mu_eff * dec.e / den) * x;
  else dec.anomaly = true;
  dec.ops += {2 * (N + 1) + 2, N + 2, 2};
  return dec;
}

// n_vec is the noise realization [n(k) .. n(k-L)], only read by the noise CV.
inline UpdateDecision smap_step(FilterState& s, const RegressorWindow& win, double gammabar, const CVPolicy& cv,
                                double delta = 1e-12, const Vec* n_vec = nullptr) {
  check_state(s, win.X.col(0));
  const long N = win.X.rows() - 1, L = win.X.cols() - 1;
  UpdateDecision dec;
  Vec e = win.d - win.X.transpose() * s.w;
  dec.e = e(0);
  dec.ops = detail::error_ops(N, L);
  const double ae = std::abs(dec.e);
  if (!sm_gate(ae, gammabar)) return dec;
  dec.updated = true;
  dec.mu_eff = 1.0 - gammabar / ae;
  dec.cv = make_cv(cv, e, n_vec, gammabar, &dec.cv_out_of_bound);
  Vec y = regularized_solve(win.X.transpose() * win.X, e - dec.cv, delta, &dec.regularized);
  s.w += win.X * y;
  dec.ops += detail::ap_update_ops(N, L);
  return dec;
}

// Two-sided Gaussian tail: finds g with erfc(g / (sigma sqrt 2)) = p, by bisection.
inline double gaussian_tail_threshold(double p, double sigma2) {
  if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("update rate p must lie in (0, 1]");
  if (p == 1.0 || sigma2 == 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (std::erfc(hi / std::sqrt(2.0)) > p) hi *= 2.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (std::erfc(mid / std::sqrt(2.0)) > p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) * std::sqrt(sigma2);
}

// Steady-state excess MSE of SM-AP for a given threshold and update probability.
inline double sm_emse(double gammabar, double p, double sigma_n2, int L) {
  const double Lp1 = L + 1.0;
  const double rho0 = std::sqrt(2.0 / (std::numbers::pi * (2.0 * sigma_n2 + gammabar * gammabar / Lp1)));
  const double a = (1.0 - p + 2.0 * p * gammabar * rho0) * (1.0 - p);
  const double num = Lp1 * (sigma_n2 + gammabar * gammabar - 2.0 * gammabar * sigma_n2 * rho0) * p;
  const double den = (2.0 - p) - 2.0 * (1.0 - p) * gammabar * rho0;
  const double geo = (std::abs(1.0 - a) < 1e-15) ? 1.0 / Lp1 : (1.0 - a) / (1.0 - std::pow(a, Lp1));
  return num / den * geo;
}

enum class GammaMode { first_pass, emse_refined };

inline double estimate_gammabar(double p, double sigma_n2, int L, GammaMode mode) {
  const double g1 = gaussian_tail_threshold(p, sigma_n2);
  if (mode == GammaMode::first_pass || p == 1.0) return g1;
  const double emse = sm_emse(g1, p, sigma_n2, L);
  return gaussian_tail_threshold(p, emse + sigma_n2);
}

// Counts updates among the last E flags of `history`.
inline double timevarying_gammabar(const std::vector<bool>& history, int E, int threshold, double sigma_n2,
                                   double tau_low, double tau_high) {
  if (E < 1) throw std::invalid_argument("timevarying_gammabar: E must be >= 1");
  const std::size_t from = history.size() > static_cast<std::size_t>(E) ? history.size() - E : 0;
  int count = 0;
  for (std::size_t i = from; i < history.size(); ++i) count += history[i];
  return std::sqrt((count >= threshold ? tau_low : tau_high) * sigma_n2);
}

// Ring buffer owned by one filter instance.
class TimeVaryingGamma {
 public:
  TimeVaryingGamma(int E = 20, int threshold = 4, double sigma_n2 = 0.01, double tau_low = 5, double tau_high = 9)
      : E_(E), threshold_(threshold), sigma_n2_(sigma_n2), tau_low_(tau_low), tau_high_(tau_high) {
    if (E < 1) throw std::invalid_argument("TimeVaryingGamma: E must be >= 1");
  }
  // An empty history counts as transient.
  double current() const {
    if (hist_.empty()) return std::sqrt(tau_low_ * sigma_n2_);
    int count = 0;
    for (bool u : hist_) count += u;
    return std::sqrt((count >= threshold_ ? tau_low_ : tau_high_) * sigma_n2_);
  }
  void record(bool updated) {
    hist_.push_back(updated);
    if (hist_.size() > static_cast<std::size_t>(E_)) hist_.pop_front();
  }

 private:
  int E_, threshold_;
  double sigma_n2_, tau_low_, tau_high_;
  std::deque<bool> hist_;
};

}  // namespace smf
