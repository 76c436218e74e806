// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <smf/smf.hpp>

using namespace smf;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

struct Replica {
  SystemModel sys;
  Seq x;
  Desired dn;
};

// 10-coefficient Gaussian system, white input, sigma_n2 = 0.01
Replica ch3_replica(std::uint64_t seed) {
  Rng base(seed);
  Rng a = base.split(1), b = base.split(2), c = base.split(3);
  Replica r;
  r.sys = {Vec::Zero(10), "g"};
  for (int i = 0; i < 10; ++i) r.sys.w_o(i) = a.normal();
  r.x = gen_input(InputSpec::white(), 2500, b);
  r.dn = synth_desired(r.sys, r.x, 0.01, c);
  return r;
}

const double kGb = std::sqrt(5 * 0.01);

Outcome c1_local_robustness() {
  ExperimentConfig c = scenario_preset("ch3-robust-smnlms");
  auto t = run_trial(c, 0);
  std::size_t bad = 0, updates = 0;
  for (std::size_t k = 0; k < t.e2.size(); ++k) {
    if (t.updated[k]) {
      ++updates;
      bad += !(t.g1[k] < t.g2[k] + 1e-12) || t.g1[k] == t.g2[k];
    } else {
      bad += std::abs(t.g1[k] - t.g2[k]) > 1e-12;
    }
  }
  return {bad == 0 && updates > 0, fmt("%zu iterations, %zu updates, %zu violations", t.e2.size(), updates, bad)};
}

Outcome c2_global_ratio() {
  double worst = 0;
  std::size_t bad = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto r = ch3_replica(seed);
    auto tr = trace_smnlms(r.sys, r.x, r.dn, kGb);
    for (std::size_t K = 1; K <= tr.steps.size(); ++K) {
      auto g = smnlms_global_ratio(tr, K);
      if (g.degenerate) continue;
      worst = std::max(worst, g.ratio);
      bad += !(g.ratio < 1.0);
    }
  }
  return {bad == 0, fmt("100 seeds, max ratio %.6f", worst)};
}

Outcome c3_monotonicity() {
  double worst = 0, bound = increase_probability_bound(5.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto r = ch3_replica(1000 + seed);
    auto m = monotonicity_counter(trace_smnlms(r.sys, r.x, r.dn, kGb), 5.0);
    worst = std::max(worst, m.fraction());
  }
  return {worst < bound, fmt("max increase fraction %.4f, bound %.4f", worst, bound)};
}

Outcome c4_known_bound() {
  const double B = 0.11;
  std::size_t incr = 0;
  bool applicable = true;
  for (double gb : {2 * B, 0.3}) {
    Rng base(4);
    Rng a = base.split(1), b = base.split(2);
    SystemModel sys = random_gaussian_system(9, 5);
    Seq x = gen_input(InputSpec::white(), 2500, a);
    Desired dn = synth_desired_bounded(sys, x, B, b);
    auto v = known_bound_guard(trace_smnlms(sys, x, dn, gb), B);
    incr += v.increases;
    applicable = applicable && v.applicable;
  }
  return {incr == 0 && applicable, fmt("increases of |w~|^2: %zu", incr)};
}

Outcome c5_cv_trichotomy() {
  Rng base(6);
  Rng b = base.split(2), c = base.split(3);
  SystemModel sys = random_gaussian_system(9, 7);
  Seq x = gen_input(InputSpec::ar1(0.95), 1000, b);
  Desired dn = synth_desired(sys, x, 0.01, c);
  auto tn = trace_smap(sys, x, dn, 2, kGb, CVPolicy::noise());
  std::size_t noise_viol = 0;
  for (std::size_t k = 0; k < tn.steps.size(); ++k) {
    auto chk = smap_local_check(tn, k);
    noise_viol += chk.g1 > chk.g2 + 1e-9 * std::max(1.0, chk.g2);
  }
  auto tg = trace_smap(sys, x, dn, 2, kGb, CVPolicy::general());
  std::size_t gen_viol = 0;
  for (std::size_t k = 0; k < tg.steps.size(); ++k) {
    auto chk = smap_local_check(tg, k);
    gen_viol += chk.g1 > chk.g2;
  }
  auto d = divergence_monitor(tg);
  return {noise_viol == 0 && gen_viol > 0 && d.finite,
          fmt("noise CV violations %zu, general CV violations %zu, max |w~|^2 %.3g", noise_viol, gen_viol, d.max_dev2)};
}

template <class T>
T rand_h(Rng& r) {
  if constexpr (std::is_same_v<T, Trinion>) return {r.normal(), r.normal(), r.normal()};
  else return {r.normal(), r.normal(), r.normal(), r.normal()};
}

template <class T>
double hc_reduction_gap(std::uint64_t seed) {
  const int N = 4, L = 2;
  Rng r(seed);
  HVec<T> wo(N + 1), u(500), d(500);
  for (auto& v : wo) v = rand_h<T>(r);
  for (auto& v : u) v = rand_h<T>(r);
  for (long k = 0; k < 500; ++k) d[k] = hc_inner(wo, hc_tap_vector(u, k, N)) + 0.1 * rand_h<T>(r);
  HCFilterState<T> a(N + 1), b(N + 1);
  double gap = 0;
  for (long k = 0; k < 500; ++k) {
    HCWindow<T> win;
    for (int j = 0; j <= L; ++j) {
      win.cols.push_back(hc_tap_vector(u, k - j, N));
      win.d.push_back(k - j >= 0 ? d[k - j] : T{});
    }
    smhap_step(a, win, 0.0, CVPolicy::zero());
    hap_step(b, win, 1.0);
    for (int i = 0; i <= N; ++i) gap = std::max(gap, abs(a.w[i] - b.w[i]));
  }
  return gap;
}

Outcome c6_reductions() {
  Rng rng(3);
  Seq x = gen_input(InputSpec::ar1(0.8), 500, rng);
  Seq d = gen_input(InputSpec::white(), 500, rng);
  double ap = 0, nl = 0;
  FilterState a(Vec::Zero(5)), b(Vec::Zero(5)), c(Vec::Zero(5)), e(Vec::Zero(5));
  for (long k = 0; k < 500; ++k) {
    auto win = window_at(x, d, k, 4, 2);
    smap_step(a, win, 0.0, CVPolicy::zero());
    ap_step(b, win, 1.0);
    ap = std::max(ap, (a.w - b.w).cwiseAbs().maxCoeff());
    smnlms_step(c, win.x(), win.d(0), 0.0);
    nlms_step(e, win.x(), win.d(0), 1.0);
    nl = std::max(nl, (c.w - e.w).cwiseAbs().maxCoeff());
  }
  const double tap = hc_reduction_gap<Trinion>(1), qap = hc_reduction_gap<Quaternion>(2);
  const double worst = std::max({ap, nl, tap, qap});
  return {worst <= 1e-12, fmt("max gap AP %.2g, NLMS %.2g, TAP %.2g, QAP %.2g", ap, nl, tap, qap)};
}

Outcome c7_kkt() {
  Rng rng(77);
  std::size_t windows = 0, gated = 0;
  double worst = 0;
  while (windows < 10000) {
    const int N = 2 + static_cast<int>(rng.index(10)), L = static_cast<int>(rng.index(std::min(N, 4)));
    RegressorWindow win;
    win.X = Mat(N + 1, L + 1);
    win.d = Vec(L + 1);
    for (int i = 0; i <= N; ++i)
      for (int j = 0; j <= L; ++j) win.X(i, j) = rng.normal();
    for (int j = 0; j <= L; ++j) win.d(j) = 2 * rng.normal();
    win.N = N;
    win.L = L;
    Eigen::JacobiSVD<Mat> svd(win.X);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) == 0 || std::pow(sv(0) / sv(sv.size() - 1), 2) >= 1e6) continue;
    ++windows;
    Vec w(N + 1);
    for (int i = 0; i <= N; ++i) w(i) = rng.normal();
    FilterState s(w);
    const CVPolicy cv = windows % 2 ? CVPolicy::simple() : CVPolicy::general();
    auto dec = smap_step(s, win, rng.uniform(0.05, 1.0), cv, 0.0);
    if (!dec.updated) continue;
    ++gated;
    worst = std::max(worst, (win.d - win.X.transpose() * s.w - dec.cv).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-9 && gated > 0, fmt("%zu windows, %zu gated updates, max residual %.2g", windows, gated, worst)};
}

Outcome c8_complexity() {
  std::size_t bad = 0, checked = 0;
  auto eq = [&](const OpCounts& a, const OpCounts& b) {
    ++checked;
    bad += !(a == b);
  };
  for (long long N : {5, 10, 15, 80}) {
    for (long long L : {0, 1, 3, 4}) {
      const long long L2 = L * L, L3 = L2 * L;
      eq(complexity_count(HCAlgo::QNLMS, N, L), {20 * N + 4, 20 * N - 1, 0});
      eq(complexity_count(HCAlgo::TNLMS, N, L), {12 * N + 3, 12 * N - 1, 0});
      eq(complexity_count(HCAlgo::QAP, N, L),
         {32 * L3 + 16 * N * L2 + 16 * L2 + 19 * N * L + 26 * L, 32 * L3 + 16 * N * L2 + 4 * L2 + 16 * N * L + 8 * L, 0});
      eq(complexity_count(HCAlgo::TAP, N, L),
         {18 * L3 + 9 * N * L2 + 9 * L2 + 11 * N * L + 50 * L, 18 * L3 + 9 * N * L2 + 9 * N * L + 39 * L, 0});
      eq(sparse_complexity_count(SparseAlgo::SM_PAPA, N, L),
         {(L2 + 5 * L + 7) * N + (2 * L3 + 6 * L2 + 9 * L + 8), N * N + (L2 + 4 * L + 5) * N + (2 * L3 + 5 * L2 + 7 * L + 5),
          2 * N + (2 * L2 + 4 * L + 4)});
      eq(sparse_complexity_count(SparseAlgo::SSM_AP, N, L),
         {(L2 + 6 * L + 9) * N + (2 * L3 + 7 * L2 + 12 * L + 11), (L2 + 6 * L + 7) * N + (2 * L3 + 6 * L2 + 9 * L + 7),
          N + (2 * L2 + 4 * L + 3)});
      auto s = sparse_complexity_count(SparseAlgo::S_SM_AP, N, L);
      ++checked;
      bad += 2 * s.mults != (L2 + 5 * L + 6) * N + (L3 + 6 * L2 + 11 * L + 8) ||
             2 * s.adds != (L2 + 5 * L + 6) * N + (L3 + 4 * L2 + 11 * L + 8) || s.divs != L2;
    }
    eq(sparse_complexity_count(SparseAlgo::AS_RLS, N, 0), {N * N + 5 * N + 1, N * N + 3 * N, 1});
    eq(sparse_complexity_count(SparseAlgo::A_L0_RLS, N, 0), {N * N + 9 * N + 1, N * N + 5 * N, N + 1});
    eq(sparse_complexity_count(SparseAlgo::ASVB_L, N, 0), {2 * N * N + 10 * N + 3, N * N + 7 * N + 6, 6 * N + 2});
  }
  return {bad == 0, fmt("%zu table entries, %zu mismatches", checked, bad)};
}

Outcome c9_update_rates() {
  auto c3 = scenario_preset("ch3-robust-smnlms");
  c3.robustness = false;
  c3.trials = 500;
  const double r3 = run_experiment(c3).summary.update_rate;

  auto c5 = scenario_preset("ch5-sysid");
  c5.trials = 500;
  c5.algo = "ismpuap";
  auto i5 = run_experiment(c5).summary;
  c5.algo = "smpuap";  // same M-fraction: equal coefficients per update
  auto s5 = run_experiment(c5).summary;

  auto c6 = scenario_preset("ch6-sysid");
  c6.trials = 500;
  const double r6 = run_experiment(c6).summary.update_rate;

  const bool ok3 = std::abs(r3 - 0.046) <= 0.02;
  const bool ok5 = std::abs(i5.update_rate - 0.083) <= 0.03 && i5.steady_mse_db < s5.steady_mse_db;
  const bool ok6 = std::abs(r6 - 0.063) <= 0.025;
  return {ok3 && ok5 && ok6,
          fmt("ch3 %.2f%%; ch5 I-SM-PUAP %.2f%% at %.2f dB vs SM-PUAP %.2f dB; ch6 %.2f%%", 100 * r3,
              100 * i5.update_rate, i5.steady_mse_db, s5.steady_mse_db, 100 * r6)};
}

Outcome c10_flms_gain() {
  auto c = scenario_preset("ch7-flms");
  c.trials = 200;
  c.steady_window = 500;
  const double f = run_experiment(c).summary.steady_mse_db;
  c.algo = "lms";
  const double l = run_experiment(c).summary.steady_mse_db;
  return {l - f >= 3.0, fmt("F-LMS %.2f dB, LMS %.2f dB, gain %.2f dB", f, l, l - f)};
}

Outcome c11_feature_fidelity() {
  Vec w(10), want(10);
  w << 0, 0.5, 0.51, 0.01, 0.6, 0.7, 0.8, 0.81, 0, -0.01;
  want << 0, 0.5, 0, 0, 0.6, 0.7, 0.8, 0, 0, 0;
  const bool example = feature_fn(w, 0.02) == want && feature_fn_matrix_form(w, 0.02).w_s == want;
  Rng rng(10);
  int mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    Vec v(21);
    for (int i = 0; i < 21; ++i) v(i) = rng.normal();
    mismatches += feature_fn_matrix_form(v, 0.02).w_s != feature_fn(v, 0.02);
  }
  return {example && mismatches == 0,
          fmt("worked example %s, matrix form mismatches %d/1000", example ? "exact" : "differs", mismatches)};
}

Outcome c12_lcf_counts() {
  struct Case {
    const char* system;
    const char* algo;
    int period;
    double want;
  };
  const Case cases[] = {{"ch7_lowpass_0.4", "lcf", 3, 1},
                        {"ch7_lowpass_0.4", "alcf", 3, 13},
                        {"ch7_lowpass_0.4", "alcf", 7, 6},
                        {"ch7_block_low", "lcf", 3, 3}};
  bool ok = true;
  std::ostringstream os;
  for (const auto& cs : cases) {
    auto c = scenario_preset("ch7-lcf");
    c.system = cs.system;
    c.algo = cs.algo;
    c.period = cs.period;
    os << cs.algo << (std::string(cs.algo) == "alcf" ? "(p=" + std::to_string(cs.period) + ")" : "") << " on "
       << cs.system << " want " << cs.want << " got";
    for (int t = 0; t < 5; ++t) {
      const double m = steady_mode(run_trial(c, t).mults, 500);
      ok = ok && m == cs.want;
      os << ' ' << m;
    }
    os << "; ";
  }
  return {ok, os.str()};
}

Outcome c13_gradients() {
  Rng rng(13);
  double worst = 0;
  for (auto k : {SurrogateKind::GMF, SurrogateKind::MGMF, SurrogateKind::LF, SurrogateKind::MLF}) {
    for (double beta : {2.0, 5.0, 10.0}) {
      L0Surrogate s{k, beta};
      for (int t = 0; t < 500; ++t) {
        const double w = rng.normal() * 0.5;
        if (std::abs(w) <= 1e-3) continue;
        const double h = 1e-5;
        const double fd = (l0_surrogate_scalar(w + h, s) - l0_surrogate_scalar(w - h, s)) / (2 * h);
        worst = std::max(worst, std::abs(fd - l0_gradient_scalar(w, s)));
      }
    }
  }
  std::size_t pbad = 0, pchecked = 0;
  for (auto kind : {FeatureMatrixKind::lowpass(), FeatureMatrixKind::highpass(), FeatureMatrixKind::lowpass_interp(2),
                    FeatureMatrixKind::highpass_interp(3), FeatureMatrixKind::nested(2)}) {
    for (int t = 0; t < 200; ++t) {
      Vec w(16);
      for (int i = 0; i < 16; ++i) w(i) = rng.normal();
      Mat F = feature_matrix(kind, 16);
      Vec Fw = F * w;
      if ((Fw.array() == 0.0).any()) continue;
      ++pchecked;
      Vec grad = F.transpose() * Fw.unaryExpr([](double v) { return v > 0 ? 1.0 : -1.0; });
      pbad += (flms_gradient(kind, w) - grad).cwiseAbs().maxCoeff() > 1e-12;
    }
  }
  return {worst <= 1e-6 && pbad == 0 && pchecked > 0,
          fmt("surrogate max |fd - grad| %.2g; p vs F^T sgn(Fw): %zu/%zu mismatches", worst, pbad, pchecked)};
}

Outcome c14_gammabar() {
  double lo = 0, hi = 40;
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (0.5 * std::erfc(m / std::sqrt(2.0)) > 0.025 ? lo : hi) = m;
  }
  const double g = estimate_gammabar(0.05, 1.0, 0, GammaMode::first_pass);
  ExperimentConfig c;
  c.algo = "smnlms";
  c.N = 10;
  c.iterations = 5000;
  c.trials = 200;
  c.sigma_n2 = 0.01;
  c.gamma_policy = "emse_refined";
  c.target_p = 0.05;
  c.steady_window = 2000;
  const double rate = run_experiment(c).summary.steady_update_rate;
  const bool ok = std::abs(g - 1.960) <= 1e-3 && std::abs(g - lo) <= 1e-9 && std::abs(rate - 0.05) <= 0.02;
  return {ok, fmt("first pass %.6f (oracle %.6f); emse_refined steady rate %.2f%%", g, lo, 100 * rate)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"SM-NLMS local robustness", c1_local_robustness},
      {"global ratio below one", c2_global_ratio},
      {"monotonicity probability", c3_monotonicity},
      {"known noise bound", c4_known_bound},
      {"SM-AP CV trichotomy", c5_cv_trichotomy},
      {"reduction equivalences", c6_reductions},
      {"constrained-solution oracle", c7_kkt},
      {"complexity tables", c8_complexity},
      {"update rates", c9_update_rates},
      {"F-LMS gain", c10_flms_gain},
      {"feature-function fidelity", c11_feature_fidelity},
      {"LCF multiplication counts", c12_lcf_counts},
      {"gradient checks", c13_gradients},
      {"gammabar estimator", c14_gammabar},
  };
  int failed = 0, i = 0;
  for (const auto& [name, fn] : criteria) {
    ++i;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", i, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
