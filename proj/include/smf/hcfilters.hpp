#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypercomplex.hpp"
#include "smcore.hpp"

namespace smf {

template <class T> using HVec = std::vector<T>;

template <class T>
struct HCFilterState {
  HVec<T> w;
  HCFilterState() = default;
  explicit HCFilterState(std::size_t len) : w(len) {}
  explicit HCFilterState(HVec<T> w0) : w(std::move(w0)) {}
};

// Column j is the regressor x(k-j); d holds d(k-j).
template <class T>
struct HCWindow {
  std::vector<HVec<T>> cols;
  HVec<T> d;
  int L() const { return static_cast<int>(cols.size()) - 1; }
};

// Tapped delay line over a scalar hypercomplex sequence, zero pre-history.
template <class T>
HVec<T> hc_tap_vector(const HVec<T>& u, long k, int N) {
  HVec<T> v(N + 1);
  for (int i = 0; i <= N; ++i) {
    long idx = k - i;
    v[i] = (idx >= 0 && idx < static_cast<long>(u.size())) ? u[idx] : T{};
  }
  return v;
}

// Snapshot regressors (one vector per time index), e.g. array outputs.
template <class T>
HCWindow<T> hc_window_from_snapshots(const std::vector<HVec<T>>& xs, const HVec<T>& d, long k, int L) {
  HCWindow<T> win;
  const std::size_t M = xs.empty() ? 0 : xs[0].size();
  for (int j = 0; j <= L; ++j) {
    long idx = k - j;
    bool ok = idx >= 0 && idx < static_cast<long>(xs.size());
    win.cols.push_back(ok ? xs[idx] : HVec<T>(M));
    win.d.push_back(ok ? d[idx] : T{});
  }
  return win;
}

// w^H x
template <class T>
T hc_inner(const HVec<T>& w, const HVec<T>& x) {
  if (w.size() != x.size()) throw std::invalid_argument("hc_inner: size mismatch");
  T acc{};
  for (std::size_t n = 0; n < w.size(); ++n) acc += conj(w[n]) * x[n];
  return acc;
}

template <class T>
double hc_norm2(const HVec<T>& x) {
  double s = 0.0;
  for (const auto& v : x) s += norm2(v);
  return s;
}

template <class T>
HVec<T> hc_errors(const HCFilterState<T>& s, const HCWindow<T>& win) {
  HVec<T> e(win.cols.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = win.d[i] - hc_inner(s.w, win.cols[i]);
  return e;
}

namespace detail {
// Solves (X^H X + delta I) lambda = r in the real embedding.
template <class T>
HVec<T> hc_solve(const HCWindow<T>& win, const HVec<T>& r, double delta, bool* flagged) {
  constexpr int D = T::dim;
  const int m = static_cast<int>(win.cols.size());
  Mat G(D * m, D * m);
  Vec rhs(D * m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) G.block(D * i, D * j, D, D) = hc_inner(win.cols[i], win.cols[j]).mult_matrix();
    rhs.segment(D * i, D) = r[i].vec();
  }
  Vec y = regularized_solve(G, rhs, delta, flagged);
  HVec<T> lam(m);
  for (int i = 0; i < m; ++i) lam[i] = T::from_vec(y.segment(D * i, D));
  return lam;
}

template <class T>
void hc_apply(HCFilterState<T>& s, const HCWindow<T>& win, const HVec<T>& lam) {
  for (std::size_t n = 0; n < s.w.size(); ++n)
    for (std::size_t j = 0; j < lam.size(); ++j) s.w[n] += win.cols[j][n] * lam[j];
}
}  // namespace detail

// Hypercomplex constraint vector. `general` keeps the direction of each error
// with magnitude gammabar.
template <class T>
HVec<T> hc_make_cv(const CVPolicy& policy, const HVec<T>& e, double gammabar) {
  HVec<T> cv(e.size());
  auto scaled = [&](T v) { double a = abs(v); return a > 0 ? (gammabar / a) * v : T{}; };
  switch (policy.kind) {
    case CVKind::simple_choice:
      cv = e;
      cv[0] = scaled(e[0]);
      break;
    case CVKind::general:
      for (std::size_t i = 0; i < e.size(); ++i) cv[i] = scaled(e[i]);
      break;
    case CVKind::zero: break;
    case CVKind::noise: throw std::invalid_argument("noise CV is only available for real filters");
  }
  return cv;
}

// SMTAP / SMQAP: w' = w + X (X^H X + delta I)^-1 (e - gamma)^*
template <class T>
UpdateDecision smhap_step(HCFilterState<T>& s, const HCWindow<T>& win, double gammabar, const CVPolicy& cv,
                          double delta = 1e-12) {
  UpdateDecision dec;
  HVec<T> e = hc_errors(s, win);
  const double ae = abs(e[0]);
  dec.e = ae;
  if (!sm_gate(ae, gammabar)) return dec;
  dec.updated = true;
  dec.mu_eff = 1.0 - gammabar / ae;
  HVec<T> g = hc_make_cv(cv, e, gammabar);
  HVec<T> r(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) r[i] = conj(e[i] - g[i]);
  detail::hc_apply(s, win, detail::hc_solve(win, r, delta, &dec.regularized));
  return dec;
}

// TAP / QAP with step mu.
template <class T>
HVec<T> hap_step(HCFilterState<T>& s, const HCWindow<T>& win, double mu, double delta = 1e-12) {
  HVec<T> e = hc_errors(s, win);
  HVec<T> r(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) r[i] = mu * conj(e[i]);
  detail::hc_apply(s, win, detail::hc_solve(win, r, delta, nullptr));
  return e;
}

namespace detail {
// x (x^H x + delta)^-1 c. For trinions x^H x is a trinion, not a real number.
template <class T>
void hc_nlms_apply(HCFilterState<T>& s, const HVec<T>& x, T c, double delta) {
  T k;
  if constexpr (std::is_same_v<T, Trinion>) {
    k = inverse(hc_inner(x, x) + Trinion{delta}, delta) * c;
  } else {
    k = c / (hc_norm2(x) + delta);
  }
  for (std::size_t n = 0; n < s.w.size(); ++n) s.w[n] += x[n] * k;
}
}  // namespace detail

// SMTNLMS / SMQNLMS
template <class T>
UpdateDecision smhnlms_step(HCFilterState<T>& s, const HVec<T>& x, T d, double gammabar, double delta = 1e-12) {
  UpdateDecision dec;
  const T e = d - hc_inner(s.w, x);
  const double ae = abs(e);
  dec.e = ae;
  if (!sm_gate(ae, gammabar)) return dec;
  dec.updated = true;
  dec.mu_eff = 1.0 - gammabar / ae;
  detail::hc_nlms_apply(s, x, dec.mu_eff * conj(e), delta);
  return dec;
}

// TNLMS / QNLMS
template <class T>
T hnlms_step(HCFilterState<T>& s, const HVec<T>& x, T d, double mu, double delta = 1e-12) {
  const T e = d - hc_inner(s.w, x);
  detail::hc_nlms_apply(s, x, mu * conj(e), delta);
  return e;
}

// QLMS / TLMS: w' = w + mu x e^*
template <class T>
T hlms_step(HCFilterState<T>& s, const HVec<T>& x, T d, double mu) {
  const T e = d - hc_inner(s.w, x);
  const T c = mu * conj(e);
  for (std::size_t n = 0; n < s.w.size(); ++n) s.w[n] += x[n] * c;
  return e;
}

inline UpdateDecision smtap_step(HCFilterState<Trinion>& s, const HCWindow<Trinion>& win, double gammabar,
                                 const CVPolicy& cv, double delta = 1e-12) {
  return smhap_step(s, win, gammabar, cv, delta);
}
inline UpdateDecision smqap_step(HCFilterState<Quaternion>& s, const HCWindow<Quaternion>& win, double gammabar,
                                 const CVPolicy& cv, double delta = 1e-12) {
  return smhap_step(s, win, gammabar, cv, delta);
}
inline UpdateDecision smtnlms_step(HCFilterState<Trinion>& s, const HVec<Trinion>& x, Trinion d, double gammabar,
                                   double delta = 1e-12) {
  return smhnlms_step(s, x, d, gammabar, delta);
}
inline UpdateDecision smqnlms_step(HCFilterState<Quaternion>& s, const HVec<Quaternion>& x, Quaternion d,
                                   double gammabar, double delta = 1e-12) {
  return smhnlms_step(s, x, d, gammabar, delta);
}

enum class HCAlgo { QNLMS, QAP, TNLMS, TAP };

inline HCAlgo parse_hc_algo(const std::string& s) {
  if (s == "QNLMS") return HCAlgo::QNLMS;
  if (s == "QAP") return HCAlgo::QAP;
  if (s == "TNLMS") return HCAlgo::TNLMS;
  if (s == "TAP") return HCAlgo::TAP;
  throw std::invalid_argument("unknown hypercomplex algorithm: " + s);
}

// Real multiplications and additions per weight update.
inline OpCounts complexity_count(HCAlgo algo, long long N, long long L) {
  const long long L2 = L * L, L3 = L2 * L;
  switch (algo) {
    case HCAlgo::QNLMS: return {20 * N + 4, 20 * N - 1, 0};
    case HCAlgo::QAP:
      return {32 * L3 + 16 * N * L2 + 16 * L2 + 19 * N * L + 26 * L, 32 * L3 + 16 * N * L2 + 4 * L2 + 16 * N * L + 8 * L,
              0};
    case HCAlgo::TNLMS: return {12 * N + 3, 12 * N - 1, 0};
    case HCAlgo::TAP:
      return {18 * L3 + 9 * N * L2 + 9 * L2 + 11 * N * L + 50 * L, 18 * L3 + 9 * N * L2 + 9 * N * L + 39 * L, 0};
  }
  return {};
}

struct SteeringConfig {
  int M = 10;
  double d_spacing = 0.5;  // wavelengths
  double theta = 0.0;
  double phi = std::numbers::pi / 2;
  double gamma_pol = 0.0;
  double eta_pol = 0.0;
};

inline HVec<Quaternion> steering_vector(const SteeringConfig& cfg) {
  constexpr double pi = std::numbers::pi;
  const bool up = std::abs(cfg.phi - pi / 2) < 1e-12;
  const bool down = std::abs(cfg.phi + pi / 2) < 1e-12;
  if (!up && !down) throw std::invalid_argument("steering_vector: phi must be +pi/2 or -pi/2");
  if (cfg.theta < -1e-15 || cfg.theta > pi / 2 + 1e-15)
    throw std::invalid_argument("steering_vector: theta must lie in [0, pi/2]");
  if (cfg.M < 1) throw std::invalid_argument("steering_vector: M must be positive");
  const double sgn_phi = up ? 1.0 : -1.0;
  const JComplex px = -sgn_phi * std::cos(cfg.gamma_pol);
  const JComplex py = sgn_phi * std::cos(cfg.theta) * std::sin(cfg.gamma_pol) * std::polar(1.0, cfg.eta_pol);
  HVec<Quaternion> s(cfg.M);
  for (int m = 0; m < cfg.M; ++m) {
    const JComplex sc = std::polar(1.0, -2.0 * pi * m * cfg.d_spacing * std::sin(cfg.theta) * std::sin(cfg.phi));
    s[m] = cayley_dickson_join(px * sc, py * sc);
  }
  return s;
}

// Signed theta: negative values mean phi = -pi/2.
inline std::vector<double> beam_pattern(const HVec<Quaternion>& w, const std::vector<double>& thetas,
                                        SteeringConfig base = {}) {
  std::vector<double> out;
  out.reserve(thetas.size());
  for (double th : thetas) {
    base.theta = std::abs(th);
    base.phi = th < 0 ? -std::numbers::pi / 2 : std::numbers::pi / 2;
    base.M = static_cast<int>(w.size());
    out.push_back(abs(hc_inner(w, steering_vector(base))));
  }
  return out;
}

}  // namespace smf
