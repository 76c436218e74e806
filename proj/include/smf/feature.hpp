#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "smcore.hpp"
#include "sparse.hpp"

namespace smf {

enum class FeatureKind { lowpass, highpass, lowpass_interp, highpass_interp, nested };

struct FeatureMatrixKind {
  FeatureKind kind = FeatureKind::lowpass;
  int param = 1;  // stride for *_interp, depth M for nested

  static FeatureMatrixKind lowpass() { return {FeatureKind::lowpass, 1}; }
  static FeatureMatrixKind highpass() { return {FeatureKind::highpass, 1}; }
  static FeatureMatrixKind lowpass_interp(int L) { return {FeatureKind::lowpass_interp, L}; }
  static FeatureMatrixKind highpass_interp(int L) { return {FeatureKind::highpass_interp, L}; }
  static FeatureMatrixKind nested(int M) { return {FeatureKind::nested, M}; }
};

inline FeatureMatrixKind parse_feature_kind(const std::string& s, int param = 2) {
  if (s == "lowpass") return FeatureMatrixKind::lowpass();
  if (s == "highpass") return FeatureMatrixKind::highpass();
  if (s == "lowpass_interp") return FeatureMatrixKind::lowpass_interp(param);
  if (s == "highpass_interp") return FeatureMatrixKind::highpass_interp(param);
  if (s == "nested") return FeatureMatrixKind::nested(param);
  throw std::invalid_argument("unknown feature matrix kind: " + s);
}

namespace detail {
// rows e_i + sign * e_{i+stride}, shape (cols - stride) x cols
inline Mat banded(int cols, int stride, double sign) {
  if (stride < 1 || stride >= cols) throw std::invalid_argument("feature matrix: stride must lie in [1, N]");
  Mat F = Mat::Zero(cols - stride, cols);
  for (int i = 0; i < cols - stride; ++i) {
    F(i, i) = 1.0;
    F(i, i + stride) = sign;
  }
  return F;
}
}  // namespace detail

// len = N + 1 coefficients.
inline Mat feature_matrix(const FeatureMatrixKind& k, int len) {
  switch (k.kind) {
    case FeatureKind::lowpass: return detail::banded(len, 1, -1.0);
    case FeatureKind::highpass: return detail::banded(len, 1, 1.0);
    case FeatureKind::lowpass_interp: return detail::banded(len, k.param, -1.0);
    case FeatureKind::highpass_interp: return detail::banded(len, k.param, 1.0);
    case FeatureKind::nested: {
      if (k.param < 0 || k.param >= len - 1) throw std::invalid_argument("nested feature matrix: need 0 <= M < N");
      Mat F = detail::banded(len, 1, -1.0);
      for (int m = 1; m <= k.param; ++m) F = detail::banded(len - m, 1, -1.0) * F;
      return F;
    }
  }
  return {};
}

inline Vec feature_apply(const FeatureMatrixKind& k, const Vec& w) {
  return feature_matrix(k, static_cast<int>(w.size())) * w;
}

// p = F^T sgn(F w), a subgradient of ||F w||_1 with sgn(0) = 0.
inline Vec flms_gradient(const FeatureMatrixKind& k, const Vec& w) {
  const Mat F = feature_matrix(k, static_cast<int>(w.size()));
  return F.transpose() * (F * w).unaryExpr([](double v) { return sgn(v); });
}

// w' = w + mu e x - mu alpha p
inline double flms_step(FilterState& s, const Vec& x, double d, double mu, double alpha, const FeatureMatrixKind& k) {
  check_state(s, x);
  if (mu < 0 || alpha < 0) throw std::invalid_argument("flms_step: mu and alpha must be nonnegative");
  const double e = d - s.w.dot(x);
  Vec p = alpha != 0.0 ? flms_gradient(k, s.w) : Vec::Zero(s.w.size());
  s.w += (mu * e) * x - (mu * alpha) * p;
  return e;
}

inline Vec feature_fn(const Vec& w, double eps) {
  if (!(eps >= 0)) throw std::invalid_argument("feature_fn: eps must be nonnegative");
  Vec ws = Vec::Zero(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (i == 0 || std::abs(w(i) - w(i - 1)) > eps) ws(i) = discard(w(i), eps);
  return ws;
}

// Indices with mod(i, p) == 0 always pass through f_eps.
inline Vec alt_feature_fn(const Vec& w, double eps, int p) {
  if (!(eps >= 0)) throw std::invalid_argument("alt_feature_fn: eps must be nonnegative");
  if (p < 1) throw std::invalid_argument("alt_feature_fn: period must be >= 1");
  Vec ws = Vec::Zero(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (i % p == 0 || std::abs(w(i) - w(i - 1)) > eps) ws(i) = discard(w(i), eps);
  return ws;
}

inline Vec indicator(const Vec& w, double eps) {
  return w.unaryExpr([eps](double v) { return std::abs(v) > eps ? 1.0 : 0.0; });
}

struct LcfOutput {
  double y = 0.0;
  long long mults = 0;  // one per nonzero entry of w_s
  long long adds = 0;
};

namespace detail {
inline void check_lcf(const Vec& ws, const Vec& b, const Vec& x) {
  if (ws.size() != b.size() || ws.size() != x.size()) throw std::invalid_argument("lcf output: size mismatch");
}
}  // namespace detail

// Reuses the last representative product for merged coefficients (b_i = 1).
inline LcfOutput lcf_output(const Vec& ws, const Vec& b, const Vec& x) {
  detail::check_lcf(ws, b, x);
  LcfOutput o;
  double temp = 0.0;
  for (Eigen::Index i = 0; i < ws.size(); ++i) {
    if (ws(i) != 0.0) {
      temp = ws(i) * x(i);
      o.y += temp;
      ++o.mults;
      ++o.adds;
    } else if (b(i) != 0.0) {
      o.y += temp;
      ++o.adds;
    }
  }
  return o;
}

// Representative times the sum of the gated inputs of its block.
inline LcfOutput ilcf_output(const Vec& ws, const Vec& b, const Vec& x) {
  detail::check_lcf(ws, b, x);
  LcfOutput o;
  double tw = 0.0, tx = 0.0;
  bool open = false;
  for (Eigen::Index i = 0; i < ws.size(); ++i) {
    if (ws(i) != 0.0) {
      if (open) {
        o.y += tw * tx;
        ++o.mults;
        ++o.adds;
      }
      tw = ws(i);
      tx = x(i);
      open = true;
    } else if (b(i) != 0.0) {
      tx += x(i);
      ++o.adds;
    }
  }
  if (open) {
    o.y += tw * tx;
    ++o.mults;
    ++o.adds;
  }
  return o;
}

enum class LcfVariant { lcf, ilcf, alcf, ailcf };

inline LcfVariant parse_lcf_variant(const std::string& s) {
  if (s == "lcf") return LcfVariant::lcf;
  if (s == "ilcf") return LcfVariant::ilcf;
  if (s == "alcf") return LcfVariant::alcf;
  if (s == "ailcf") return LcfVariant::ailcf;
  throw std::invalid_argument("unknown LCF variant: " + s);
}

struct LCFState {
  Vec w, w_s, b;
  LcfVariant variant = LcfVariant::lcf;
  int p_period = 0;  // alcf / ailcf only

  LCFState() = default;
  LCFState(int len, LcfVariant v, int p = 0)
      : w(Vec::Zero(len)), w_s(Vec::Zero(len)), b(Vec::Zero(len)), variant(v), p_period(p) {
    if ((v == LcfVariant::alcf || v == LcfVariant::ailcf) && p < 1)
      throw std::invalid_argument("alternative LCF variants need a period >= 1");
  }
};

struct LcfStep {
  double e = 0.0;
  LcfOutput out;
};

// w' = w + mu e x (no factor 2), then w_s and b are refreshed from w'.
inline LcfStep lcflms_step(LCFState& s, const Vec& x, double d, double mu, double eps) {
  if (s.w.size() != x.size()) throw std::invalid_argument("lcflms_step: size mismatch");
  LcfStep r;
  const bool improved = s.variant == LcfVariant::ilcf || s.variant == LcfVariant::ailcf;
  r.out = improved ? ilcf_output(s.w_s, s.b, x) : lcf_output(s.w_s, s.b, x);
  r.e = d - r.out.y;
  s.w += (mu * r.e) * x;
  const bool alt = s.variant == LcfVariant::alcf || s.variant == LcfVariant::ailcf;
  s.w_s = alt ? alt_feature_fn(s.w, eps, s.p_period) : feature_fn(s.w, eps);
  s.b = indicator(s.w, eps);
  return r;
}

struct MatrixForm {
  Vec w_s;
  Mat Q1, F1, Q2, F2, Q3;
};

namespace detail {
inline Mat selector(const Vec& v, double eps) { return indicator(v, eps).asDiagonal(); }

// Reconstruction matrix built row by row from the nonzero pattern of r.
inline Mat reconstruction_matrix(const Vec& r) {
  const int n = static_cast<int>(r.size());
  Mat F2 = Mat::Zero(n, n);
  auto next_nz = [&](int from) {
    for (int i = from; i < n; ++i)
      if (r(i) != 0.0) return i;
    return n;
  };
  int pos = next_nz(0);
  if (pos == n) return F2;
  Eigen::RowVectorXd cur = Eigen::RowVectorXd::Zero(n);
  cur(pos) = 1.0;
  F2.row(pos) = cur;
  ++pos;
  while (pos < n) {
    while (pos < n && r(pos) != 0.0) {
      cur(pos) = 1.0;
      F2.row(pos++) = cur;
    }
    if (pos >= n) break;
    const int i2 = next_nz(pos);
    if (i2 == n) {
      for (; pos < n; ++pos) F2.row(pos) = cur;
      break;
    }
    cur(i2) = 1.0;
    F2.row(pos++) = cur;
    const int i3 = next_nz(i2 + 1);
    for (; pos < i3; ++pos) F2.row(pos) = cur;
    if (i3 == n) break;
    cur.setZero();
    cur(i3) = 1.0;
    F2.row(i3) = cur;
    pos = i3 + 1;
  }
  return F2;
}
}  // namespace detail

// w_s = Q3 F2 Q2 F1 Q1 w, evaluated as the literal product.
inline MatrixForm feature_fn_matrix_form(const Vec& w, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("feature_fn_matrix_form: eps must be positive");
  const int n = static_cast<int>(w.size());
  MatrixForm m;
  m.Q1 = detail::selector(w, eps);
  m.F1 = Mat::Identity(n, n);
  for (int i = 1; i < n; ++i) m.F1(i, i - 1) = -1.0;
  const Vec u = m.F1 * (m.Q1 * w);
  m.Q2 = detail::selector(u, eps);
  const Vec r = m.Q2 * u;
  m.F2 = detail::reconstruction_matrix(r);
  const Vec v = m.F2 * r;
  m.Q3 = detail::selector(v, eps);
  m.w_s = m.Q3 * v;
  return m;
}

}  // namespace smf
