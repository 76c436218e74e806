#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "smcore.hpp"

namespace smf {

enum class SelectionRule { largest_magnitude, random, fixed };

struct IndexSet {
  std::vector<int> indices;  // sorted ascending
  SelectionRule rule = SelectionRule::fixed;

  std::size_t size() const { return indices.size(); }
  // Diagonal of the 0/1 selector C.
  Vec mask(int len) const {
    Vec m = Vec::Zero(len);
    for (int i : indices) m(i) = 1.0;
    return m;
  }
};

inline IndexSet select_index_set(const Vec& w, int M, SelectionRule rule, Rng& rng) {
  const int n = static_cast<int>(w.size());
  if (M < 1 || M > n) throw std::invalid_argument("select_index_set: need 1 <= M <= N+1");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  switch (rule) {
    case SelectionRule::largest_magnitude:
      // ties go to the lower index
      std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return std::abs(w(a)) > std::abs(w(b)); });
      break;
    case SelectionRule::random:
      // partial Fisher-Yates
      for (int i = 0; i < M; ++i) std::swap(idx[i], idx[i + static_cast<int>(rng.index(n - i))]);
      break;
    case SelectionRule::fixed: break;
  }
  idx.resize(M);
  std::sort(idx.begin(), idx.end());
  return {idx, rule};
}

inline IndexSet select_index_set(const Vec& w, int M, SelectionRule rule, std::uint64_t seed = 0) {
  Rng rng(seed);
  return select_index_set(w, M, rule, rng);
}

namespace detail {
// C X (X^T C X + delta I)^-1 r, touching only the selected rows.
inline Vec masked_direction(const Mat& X, const IndexSet& idx, const Vec& r, double delta, bool* flagged) {
  const auto m = X.cols();
  Mat CX(static_cast<Eigen::Index>(idx.size()), m);
  for (std::size_t t = 0; t < idx.size(); ++t) CX.row(t) = X.row(idx.indices[t]);
  Vec y = regularized_solve(CX.transpose() * CX, r, delta, flagged);
  return CX * y;  // entries in index order
}
}  // namespace detail

inline UpdateDecision smpuap_step(FilterState& s, const RegressorWindow& win, double gammabar, const CVPolicy& cv,
                                  const IndexSet& idx, double delta = 1e-12, const Vec* n_vec = nullptr) {
  check_state(s, win.X.col(0));
  UpdateDecision dec;
  Vec e = win.d - win.X.transpose() * s.w;
  dec.e = e(0);
  const long N = win.X.rows() - 1, L = win.X.cols() - 1;
  dec.ops = detail::error_ops(N, L);
  const double ae = std::abs(dec.e);
  if (!sm_gate(ae, gammabar)) return dec;
  dec.updated = true;
  dec.mu_eff = 1.0 - gammabar / ae;
  dec.cv = make_cv(cv, e, n_vec, gammabar, &dec.cv_out_of_bound);
  Vec a = detail::masked_direction(win.X, idx, e - dec.cv, delta, &dec.regularized);
  for (std::size_t t = 0; t < idx.size(); ++t) s.w(idx.indices[t]) += a(t);
  dec.ops += detail::ap_update_ops(static_cast<long>(idx.size()) - 1, L);
  return dec;
}

inline constexpr double kDegenerateDirection = 1e-14;

// Moves w by exactly mu(k) along the partial direction a(k).
inline UpdateDecision ismpuap_step(FilterState& s, const RegressorWindow& win, double gammabar, const IndexSet& idx,
                                   double delta = 1e-12) {
  check_state(s, win.X.col(0));
  UpdateDecision dec;
  Vec e = win.d - win.X.transpose() * s.w;
  dec.e = e(0);
  const long N = win.X.rows() - 1, L = win.X.cols() - 1;
  dec.ops = detail::error_ops(N, L);
  const double ae = std::abs(dec.e);
  if (!sm_gate(ae, gammabar)) return dec;
  const double xn = win.X.col(0).norm();
  Vec a = detail::masked_direction(win.X, idx, e, delta, &dec.regularized);
  const double an = a.norm();
  if (an < kDegenerateDirection || xn == 0.0) {
    dec.anomaly = true;
    return dec;
  }
  dec.updated = true;
  dec.mu_eff = std::min(std::abs(-dec.e + gammabar), std::abs(-dec.e - gammabar)) / xn;
  for (std::size_t t = 0; t < idx.size(); ++t) s.w(idx.indices[t]) += dec.mu_eff * a(t) / an;
  dec.ops += detail::ap_update_ops(static_cast<long>(idx.size()) - 1, L);
  dec.ops += {static_cast<long long>(idx.size()) + 2 * (N + 1), 2 * (N + 1), 2};
  return dec;
}

}  // namespace smf
