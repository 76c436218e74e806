#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "partialupdate.hpp"

namespace smf {

inline double discard(double w, double eps) { return std::abs(w) > eps ? w : 0.0; }

inline Vec discard_vec(const Vec& w, double eps) {
  return w.unaryExpr([eps](double v) { return discard(v, eps); });
}

// Diagonal of the Jacobian of f_eps: 1 where |w_i| > eps.
inline Vec discard_jacobian(const Vec& w, double eps) {
  return w.unaryExpr([eps](double v) { return std::abs(v) > eps ? 1.0 : 0.0; });
}

enum class SurrogateKind { LF, MLF, GMF, MGMF };

struct L0Surrogate {
  SurrogateKind kind = SurrogateKind::GMF;
  double beta = 5.0;
};

inline SurrogateKind parse_surrogate(const std::string& s) {
  if (s == "LF" || s == "lf") return SurrogateKind::LF;
  if (s == "MLF" || s == "mlf") return SurrogateKind::MLF;
  if (s == "GMF" || s == "gmf") return SurrogateKind::GMF;
  if (s == "MGMF" || s == "mgmf") return SurrogateKind::MGMF;
  throw std::invalid_argument("unknown l0 surrogate: " + s);
}

inline double l0_surrogate_scalar(double w, const L0Surrogate& s) {
  const double b = s.beta;
  switch (s.kind) {
    case SurrogateKind::LF: return 1.0 - std::exp(-b * std::abs(w));
    case SurrogateKind::MLF: return 1.0 - std::exp(-0.5 * b * b * w * w);
    case SurrogateKind::GMF: return 1.0 - 1.0 / (1.0 + b * std::abs(w));
    case SurrogateKind::MGMF: return 1.0 - 1.0 / (1.0 + b * b * w * w);
  }
  return 0.0;
}

inline double l0_surrogate(const Vec& w, const L0Surrogate& s) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) acc += l0_surrogate_scalar(w(i), s);
  return acc;
}

// Derivative at the origin is 0 by convention.
inline double l0_gradient_scalar(double w, const L0Surrogate& s) {
  const double b = s.beta;
  switch (s.kind) {
    case SurrogateKind::LF: return b * sgn(w) * std::exp(-b * std::abs(w));
    case SurrogateKind::MLF: return b * b * w * std::exp(-0.5 * b * b * w * w);
    case SurrogateKind::GMF: {
      const double t = 1.0 + b * std::abs(w);
      return b * sgn(w) / (t * t);
    }
    case SurrogateKind::MGMF: {
      const double t = 1.0 + b * b * w * w;
      return 2.0 * b * b * w / (t * t);
    }
  }
  return 0.0;
}

inline Vec l0_gradient(const Vec& w, const L0Surrogate& s) {
  return w.unaryExpr([&s](double v) { return l0_gradient_scalar(v, s); });
}

// w' = w + X A (e - gamma) + (alpha/2)(X A X^T - I) g(w)
inline UpdateDecision ssmap_step(FilterState& s, const RegressorWindow& win, double gammabar, const CVPolicy& cv,
                                 double alpha, const L0Surrogate& sur, double delta = 1e-12,
                                 const Vec* n_vec = nullptr) {
  check_state(s, win.X.col(0));
  UpdateDecision dec;
  Vec e = win.d - win.X.transpose() * s.w;
  dec.e = e(0);
  const double ae = std::abs(dec.e);
  if (!sm_gate(ae, gammabar)) return dec;
  dec.updated = true;
  dec.mu_eff = 1.0 - gammabar / ae;
  dec.cv = make_cv(cv, e, n_vec, gammabar, &dec.cv_out_of_bound);
  const Mat G = win.X.transpose() * win.X;
  Vec y = regularized_solve(G, e - dec.cv, delta, &dec.regularized);
  Vec step = win.X * y;
  if (alpha != 0.0) {
    Vec g = l0_gradient(s.w, sur);
    Vec z = regularized_solve(G, win.X.transpose() * g, delta, &dec.regularized);
    step += (alpha / 2.0) * (win.X * z - g);
  }
  s.w += step;
  return dec;
}

// Proportionate weights m_i = (1 - r mu)/N + r mu |w_i| / ||w||_1, N the filter order.
inline Vec smpapa_weights(const Vec& w, double r, double mu, bool* flagged = nullptr) {
  const double N = std::max<double>(1.0, static_cast<double>(w.size() - 1));
  const double l1 = w.cwiseAbs().sum();
  if (l1 == 0.0) {
    if (flagged) *flagged = true;
    return Vec::Constant(w.size(), 1.0 / N);
  }
  return (Vec::Constant(w.size(), (1.0 - r * mu) / N) + (r * mu / l1) * w.cwiseAbs()).eval();
}

inline UpdateDecision smpapa_step(FilterState& s, const RegressorWindow& win, double gammabar, const CVPolicy& cv,
                                  double r, double delta = 1e-12, const Vec* n_vec = nullptr) {
  check_state(s, win.X.col(0));
  if (r < 0.0 || r > 1.0) throw std::invalid_argument("smpapa_step: r must lie in [0, 1]");
  UpdateDecision dec;
  Vec e = win.d - win.X.transpose() * s.w;
  dec.e = e(0);
  const double ae = std::abs(dec.e);
  if (!sm_gate(ae, gammabar)) return dec;
  dec.updated = true;
  dec.mu_eff = 1.0 - gammabar / ae;
  dec.cv = make_cv(cv, e, n_vec, gammabar, &dec.cv_out_of_bound);
  Vec m = smpapa_weights(s.w, r, dec.mu_eff, &dec.anomaly);
  Mat MX = m.asDiagonal() * win.X;
  Vec y = regularized_solve(win.X.transpose() * MX, e - dec.cv, delta, &dec.regularized);
  s.w += MX * y;
  return dec;
}

namespace detail {
inline IndexSet active_set(const Vec& w, double eps) {
  IndexSet idx;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (std::abs(w(i)) > eps) idx.indices.push_back(static_cast<int>(i));
  return idx;
}

inline UpdateDecision discard_smap(FilterState& s, const RegressorWindow& win, double gammabar, const CVPolicy& cv,
                                   double eps, double delta, const Vec* n_vec, bool improved) {
  check_state(s, win.X.col(0));
  UpdateDecision dec;
  Vec e = win.d - win.X.transpose() * s.w;
  dec.e = e(0);
  const double ae = std::abs(dec.e);
  if (!sm_gate(ae, gammabar)) return dec;
  IndexSet idx = active_set(s.w, eps);
  if (idx.indices.empty()) {
    dec.anomaly = true;
    return dec;
  }
  dec.updated = true;
  dec.mu_eff = 1.0 - gammabar / ae;
  dec.cv = make_cv(cv, e, n_vec, gammabar, &dec.cv_out_of_bound);
  Vec q = masked_direction(win.X, idx, e - dec.cv, delta, &dec.regularized);
  if (improved) s.w = discard_vec(s.w, eps);
  for (std::size_t t = 0; t < idx.size(); ++t) s.w(idx.indices[t]) += q(t);
  return dec;
}
}  // namespace detail

// S-SM-AP: only coefficients with |w_i| > eps move.
inline UpdateDecision s_smap_step(FilterState& s, const RegressorWindow& win, double gammabar, const CVPolicy& cv,
                                  double eps, double delta = 1e-12, const Vec* n_vec = nullptr) {
  return detail::discard_smap(s, win, gammabar, cv, eps, delta, n_vec, false);
}

// IS-SM-AP: additionally zeroes |w_i| <= eps when it updates.
inline UpdateDecision is_smap_step(FilterState& s, const RegressorWindow& win, double gammabar, const CVPolicy& cv,
                                   double eps, double delta = 1e-12, const Vec* n_vec = nullptr) {
  return detail::discard_smap(s, win, gammabar, cv, eps, delta, n_vec, true);
}

struct DiscardState {
  Vec w;
  Vec m;  // auxiliary weights
  explicit DiscardState(Vec w0 = {}) : w(w0), m(std::move(w0)) {}
};

// D-SM-AP: the error uses w, plain SM-AP moves m, and w = f_eps(m).
inline UpdateDecision d_smap_step(DiscardState& s, const RegressorWindow& win, double gammabar, const CVPolicy& cv,
                                  double eps, double delta = 1e-12, const Vec* n_vec = nullptr) {
  if (s.w.size() != win.X.rows() || s.m.size() != win.X.rows())
    throw std::invalid_argument("weight/regressor size mismatch");
  UpdateDecision dec;
  Vec e = win.d - win.X.transpose() * s.w;
  dec.e = e(0);
  const double ae = std::abs(dec.e);
  if (!sm_gate(ae, gammabar)) return dec;
  dec.updated = true;
  dec.mu_eff = 1.0 - gammabar / ae;
  dec.cv = make_cv(cv, e, n_vec, gammabar, &dec.cv_out_of_bound);
  Vec y = regularized_solve(win.X.transpose() * win.X, e - dec.cv, delta, &dec.regularized);
  s.m += win.X * y;
  s.w = discard_vec(s.m, eps);
  return dec;
}

inline constexpr double kSelectorFloor = 0.03125;  // 2^-5

// F_eps(w) with zero entries replaced by sign(w_i) 2^-5. An exact zero counts as
// positive, otherwise that coefficient could never leave zero.
inline Vec conditioned_selector(const Vec& w, double eps) {
  return w.unaryExpr([eps](double v) { return std::abs(v) > eps ? 1.0 : (v < 0.0 ? -kSelectorFloor : kSelectorFloor); });
}

enum class RlsVariant { standard, alternative };

struct SparseRLSState {
  Vec w;
  Mat S;
  Vec p;
  double lambda = 1.0;
};

inline SparseRLSState sparse_rls_init(const Vec& w0, double delta, double lambda) {
  if (!(lambda > 0.0) || lambda > 1.0) throw std::invalid_argument("lambda must lie in (0, 1]");
  const auto n = w0.size();
  return {w0, delta * Mat::Identity(n, n), Vec::Zero(n), lambda};
}

// S-RLS / AS-RLS
inline double srls_step(SparseRLSState& s, const Vec& x, double d, double eps, RlsVariant variant) {
  if (s.w.size() != x.size()) throw std::invalid_argument("weight/regressor size mismatch");
  const double lam = s.lambda;
  const double e = d - x.dot(s.w);
  Vec fx = conditioned_selector(s.w, eps).cwiseProduct(x);
  Vec psi = s.S * fx;
  const double den = lam + fx.dot(psi);
  s.S = (s.S - (psi * psi.transpose()) / den) / lam;
  s.S = 0.5 * (s.S + s.S.transpose());
  if (variant == RlsVariant::standard) {
    s.p = lam * s.p + fx * d;
    s.w = s.S * s.p;
  } else {
    s.w += e * (s.S * fx);
  }
  return e;
}

// l0-RLS / A-l0-RLS
inline double l0rls_step(SparseRLSState& s, const Vec& x, double d, double alpha, const L0Surrogate& sur,
                         RlsVariant variant) {
  if (s.w.size() != x.size()) throw std::invalid_argument("weight/regressor size mismatch");
  if (alpha < 0.0) throw std::invalid_argument("alpha must be non-negative");
  const double lam = s.lambda;
  const double e = d - x.dot(s.w);
  Vec psi = s.S * x;
  const double den = lam + x.dot(psi);
  s.S = (s.S - (psi * psi.transpose()) / den) / lam;
  s.S = 0.5 * (s.S + s.S.transpose());
  Vec g = l0_gradient(s.w, sur);
  if (variant == RlsVariant::standard) {
    s.p = lam * s.p + x * d;
    s.w = s.S * (s.p - (alpha / 2.0) * g);
  } else {
    s.w += s.S * (e * x + ((lam - 1.0) * alpha / 2.0) * g);
  }
  return e;
}

// Data-selective wrapper: runs `inner(s, x, d)` only when |d - w^T x| > gammabar.
template <class State, class Inner>
UpdateDecision ds_gate_wrap(State& s, const Vec& x, double d, double gammabar, Inner&& inner) {
  UpdateDecision dec;
  dec.e = d - x.dot(s.w);
  const double ae = std::abs(dec.e);
  if (!sm_gate(ae, gammabar)) return dec;
  dec.updated = true;
  inner(s, x, d);
  return dec;
}

enum class SparseAlgo { SM_PAPA, SSM_AP, S_SM_AP, AS_RLS, A_L0_RLS, ASVB_L };

inline SparseAlgo parse_sparse_algo(const std::string& s) {
  if (s == "SM-PAPA") return SparseAlgo::SM_PAPA;
  if (s == "SSM-AP") return SparseAlgo::SSM_AP;
  if (s == "S-SM-AP") return SparseAlgo::S_SM_AP;
  if (s == "AS-RLS") return SparseAlgo::AS_RLS;
  if (s == "A-l0-RLS") return SparseAlgo::A_L0_RLS;
  if (s == "ASVB-L") return SparseAlgo::ASVB_L;
  throw std::invalid_argument("unknown sparse algorithm: " + s);
}

// Worst case for S-SM-AP (every coefficient active).
inline OpCounts sparse_complexity_count(SparseAlgo algo, long long N, long long L) {
  const long long L2 = L * L, L3 = L2 * L;
  switch (algo) {
    case SparseAlgo::SM_PAPA:
      return {(L2 + 5 * L + 7) * N + (2 * L3 + 6 * L2 + 9 * L + 8), N * N + (L2 + 4 * L + 5) * N + (2 * L3 + 5 * L2 + 7 * L + 5),
              2 * N + (2 * L2 + 4 * L + 4)};
    case SparseAlgo::SSM_AP:
      return {(L2 + 6 * L + 9) * N + (2 * L3 + 7 * L2 + 12 * L + 11), (L2 + 6 * L + 7) * N + (2 * L3 + 6 * L2 + 9 * L + 7),
              N + (2 * L2 + 4 * L + 3)};
    case SparseAlgo::S_SM_AP:
      return {((L2 + 5 * L + 6) * N + (L3 + 6 * L2 + 11 * L + 8)) / 2, ((L2 + 5 * L + 6) * N + (L3 + 4 * L2 + 11 * L + 8)) / 2,
              L2};
    case SparseAlgo::AS_RLS: return {N * N + 5 * N + 1, N * N + 3 * N, 1};
    case SparseAlgo::A_L0_RLS: return {N * N + 9 * N + 1, N * N + 5 * N, N + 1};
    case SparseAlgo::ASVB_L: return {2 * N * N + 10 * N + 3, N * N + 7 * N + 6, 6 * N + 2};
  }
  return {};
}

}  // namespace smf
