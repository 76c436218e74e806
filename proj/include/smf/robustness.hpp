#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "smcore.hpp"

namespace smf {

inline constexpr double kRobustTol = 1e-12;

struct NlmsStepRecord {
  double dev2 = 0.0;       // ||w_o - w(k)||^2
  double dev2_next = 0.0;  // ||w_o - w(k+1)||^2
  double etilde = 0.0;     // noiseless error (w_o - w(k))^T x(k)
  double n = 0.0;
  double mubar = 0.0;
  double alpha = 0.0;  // ||x||^2 + delta
  double gammabar = 0.0;
  bool updated = false;
};

struct NlmsTrace {
  std::vector<NlmsStepRecord> steps;
  Vec w_final;
  std::size_t updates() const {
    std::size_t c = 0;
    for (const auto& s : steps) c += s.updated;
    return c;
  }
};

struct ApStepRecord {
  double dev2 = 0.0, dev2_next = 0.0;
  Vec etilde, n, gamma;
  Mat A;  // (X^T X + delta I)^-1, recomputed from X
  bool updated = false;
  bool well_posed = true;  // cond(X^T X) < kWellPosedCond; the energy identity needs full rank
};

inline constexpr double kWellPosedCond = 1e8;

struct ApTrace {
  std::vector<ApStepRecord> steps;
  Vec w_final;
};

struct LocalCheck {
  double g1 = 0.0, g2 = 0.0;
  int condition_sign = 0;  // sign of gamma^T A gamma - 2 gamma^T A n (SM-AP only)
  bool verdict = false;
};

// Runs SM-NLMS from w0 over the whole sequence and records the deviation
// energy against the true system. `tv` switches on the time-varying bound.
inline NlmsTrace trace_smnlms(const SystemModel& sys, const Seq& x, const Desired& dn, double gammabar,
                              double delta = 1e-12, std::optional<Vec> w0 = std::nullopt,
                              TimeVaryingGamma* tv = nullptr) {
  const int N = static_cast<int>(sys.size()) - 1;
  FilterState s(w0 ? *w0 : Vec::Zero(N + 1));
  NlmsTrace tr;
  tr.steps.reserve(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    Vec xk = tap_vector(x, static_cast<long>(k), N);
    NlmsStepRecord r;
    Vec wt = sys.w_o - s.w;
    r.dev2 = wt.squaredNorm();
    r.etilde = wt.dot(xk);
    r.n = dn.n[k];
    r.alpha = xk.squaredNorm() + delta;
    r.gammabar = tv ? tv->current() : gammabar;
    auto dec = smnlms_step(s, xk, dn.d[k], r.gammabar, delta);
    if (tv) tv->record(dec.updated);
    r.updated = dec.updated;
    r.mubar = dec.mu_eff;
    r.dev2_next = (sys.w_o - s.w).squaredNorm();
    tr.steps.push_back(r);
  }
  tr.w_final = s.w;
  return tr;
}

inline LocalCheck smnlms_local_check(const NlmsTrace& tr, std::size_t k) {
  const auto& r = tr.steps.at(k);
  LocalCheck c;
  if (!r.updated) {
    c.g1 = r.dev2_next;
    c.g2 = r.dev2;
    c.verdict = std::abs(c.g1 - c.g2) <= kRobustTol;
    return c;
  }
  const double f = r.mubar / r.alpha;
  c.g1 = r.dev2_next + f * r.etilde * r.etilde;
  c.g2 = r.dev2 + f * r.n * r.n;
  c.verdict = c.g2 - c.g1 > -kRobustTol;
  return c;
}

struct GlobalRatio {
  double ratio = 1.0;
  bool degenerate = false;  // no update in [0, K): ||w~(K)||^2 == ||w~(0)||^2
};

inline GlobalRatio smnlms_global_ratio(const NlmsTrace& tr, std::size_t K) {
  GlobalRatio g;
  if (K == 0 || K > tr.steps.size()) throw std::out_of_range("smnlms_global_ratio: K out of range");
  double num = tr.steps[K - 1].dev2_next, den = tr.steps[0].dev2;
  bool any = false;
  for (std::size_t k = 0; k < K; ++k) {
    const auto& r = tr.steps[k];
    if (!r.updated) continue;
    any = true;
    const double f = r.mubar / r.alpha;
    num += f * r.etilde * r.etilde;
    den += f * r.n * r.n;
  }
  g.degenerate = !any;
  g.ratio = den > 0 ? num / den : (num > 0 ? std::numeric_limits<double>::infinity() : 1.0);
  return g;
}

struct MonotonicityCount {
  std::size_t increases = 0;
  std::size_t iterations = 0;
  double bound = 0.0;  // erfc(sqrt(tau/2))
  double fraction() const { return iterations ? double(increases) / double(iterations) : 0.0; }
};

inline double increase_probability_bound(double tau) { return std::erfc(std::sqrt(tau / 2.0)); }

template <class Trace>
MonotonicityCount monotonicity_counter(const Trace& tr, double tau) {
  MonotonicityCount m;
  m.bound = increase_probability_bound(tau);
  m.iterations = tr.steps.size();
  for (const auto& r : tr.steps) m.increases += r.dev2_next > r.dev2;
  return m;
}

struct GuardVerdict {
  bool ok = true;
  bool applicable = true;  // false when |n| exceeded B or gammabar < 2B
  std::size_t increases = 0;
  std::size_t strict_violations = 0;  // updates without a strict decrease
};

inline GuardVerdict known_bound_guard(const NlmsTrace& tr, double B) {
  GuardVerdict v;
  for (const auto& r : tr.steps) {
    if (std::abs(r.n) > B || r.gammabar < 2.0 * B) v.applicable = false;
    if (r.dev2_next > r.dev2) ++v.increases;
    if (r.updated && !(r.dev2_next < r.dev2)) ++v.strict_violations;
  }
  v.ok = v.increases == 0 && v.strict_violations == 0;
  return v;
}

// SM-AP run with ground truth; A(k) is rebuilt from X rather than taken from the filter.
inline ApTrace trace_smap(const SystemModel& sys, const Seq& x, const Desired& dn, int L, double gammabar,
                          const CVPolicy& cv, double delta = 1e-12, std::optional<Vec> w0 = std::nullopt) {
  const int N = static_cast<int>(sys.size()) - 1;
  FilterState s(w0 ? *w0 : Vec::Zero(N + 1));
  ApTrace tr;
  tr.steps.reserve(x.size());
  RegressorWindow win;
  for (std::size_t k = 0; k < x.size(); ++k) {
    fill_window(x, dn.d, static_cast<long>(k), N, L, win);
    Vec nvec(L + 1);
    for (int j = 0; j <= L; ++j) nvec(j) = at_or_zero(dn.n, static_cast<long>(k) - j);
    ApStepRecord r;
    Vec wt = sys.w_o - s.w;
    r.dev2 = wt.squaredNorm();
    r.etilde = win.X.transpose() * wt;
    r.n = nvec;
    auto dec = smap_step(s, win, gammabar, cv, delta, &nvec);
    r.updated = dec.updated;
    r.dev2_next = (sys.w_o - s.w).squaredNorm();
    if (dec.updated) {
      r.gamma = dec.cv;
      Mat G = win.X.transpose() * win.X;
      Eigen::SelfAdjointEigenSolver<Mat> eig(G, Eigen::EigenvaluesOnly);
      const auto& ev = eig.eigenvalues();
      r.well_posed = ev(0) > 0 && ev(ev.size() - 1) / ev(0) < kWellPosedCond;
      G.diagonal().array() += delta;
      r.A = G.inverse();
    }
    tr.steps.push_back(std::move(r));
  }
  tr.w_final = s.w;
  return tr;
}

// Relative tolerance: A can be large on coloured input.
inline LocalCheck smap_local_check(const ApTrace& tr, std::size_t k, double tol = 1e-9) {
  const auto& r = tr.steps.at(k);
  LocalCheck c;
  if (!r.updated) {
    c.g1 = r.dev2_next;
    c.g2 = r.dev2;
    c.verdict = std::abs(c.g1 - c.g2) <= kRobustTol;
    return c;
  }
  c.g1 = r.dev2_next + r.etilde.dot(r.A * r.etilde);
  c.g2 = r.dev2 + r.n.dot(r.A * r.n);
  const double cond = r.gamma.dot(r.A * r.gamma) - 2.0 * r.gamma.dot(r.A * r.n);
  const double scale = tol * std::max({1.0, std::abs(c.g1), std::abs(c.g2)});
  c.condition_sign = cond < -scale ? -1 : (cond > scale ? 1 : 0);
  const double diff = c.g1 - c.g2;
  if (c.condition_sign < 0) c.verdict = diff < scale;
  else if (c.condition_sign > 0) c.verdict = diff > -scale;
  else c.verdict = std::abs(diff) <= scale;
  return c;
}

// Residual of the energy identity
// ||w~'||^2 + e~^T A e~ = ||w~||^2 + n^T A n - 2 g^T A n + g^T A g.
inline double smap_identity_residual(const ApStepRecord& r) {
  if (!r.updated) return std::abs(r.dev2_next - r.dev2);
  const double lhs = r.dev2_next + r.etilde.dot(r.A * r.etilde);
  const double rhs = r.dev2 + r.n.dot(r.A * r.n) - 2.0 * r.gamma.dot(r.A * r.n) + r.gamma.dot(r.A * r.gamma);
  return std::abs(lhs - rhs);
}

struct DivergenceReport {
  bool finite = true;
  double max_dev2 = 0.0;
  std::size_t first_overflow = 0;  // index of the first non-finite step, if any
};

// No closed-form cap exists; reports the largest observed deviation and trips
// on non-finite values or the sentinel.
template <class Trace>
DivergenceReport divergence_monitor(const Trace& tr, double sentinel = 1e100) {
  DivergenceReport d;
  for (std::size_t k = 0; k < tr.steps.size(); ++k) {
    const double v = tr.steps[k].dev2_next;
    if (!std::isfinite(v) || v > sentinel) {
      d.finite = false;
      d.first_overflow = k;
      return d;
    }
    d.max_dev2 = std::max(d.max_dev2, v);
  }
  return d;
}

}  // namespace smf
