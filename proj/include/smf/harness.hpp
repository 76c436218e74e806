#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "classic.hpp"
#include "feature.hpp"
#include "hcfilters.hpp"
#include "partialupdate.hpp"
#include "robustness.hpp"
#include "smcore.hpp"
#include "sparse.hpp"

namespace smf {

inline constexpr double kDbFloor = -320.0;

// Raised for invalid configurations; the CLI maps it to exit code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class Task { sysid, equalizer, wind, beamforming };

struct ExperimentConfig {
  std::string scenario = "custom";
  Task task = Task::sysid;
  std::string algo = "smnlms";
  int N = 10, L = 0;
  int trials = 1, iterations = 1000;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency

  // data
  std::string input = "white";  // white | bpsk | ar1 | ar
  double ar_rho = 0.95;
  bool unit_power = false;
  std::vector<double> ar_coeffs;
  int ar_delay = 1;
  std::string system = "random";  // random | <preset> | file:<path>
  double sigma_n2 = 0.01;
  double snr_db = std::numeric_limits<double>::quiet_NaN();  // overrides sigma_n2 when set
  double noise_bound = 0.0;                                   // > 0: uniform noise on [-B, B]
  std::string w0 = "zeros";                                   // zeros | ones | <value>
  int delay = 45;                                             // equalizer reference delay
  int warmup = 0;  // samples generated before k = 0: stationary input and a full tap line

  // set-membership
  double gammabar = std::sqrt(5 * 0.01);
  std::string gamma_policy = "fixed";  // fixed | timevarying | first_pass | emse_refined
  double target_p = 0.05;
  CVPolicy cv = CVPolicy::simple();
  double delta = 1e-12;

  // algorithm parameters
  double mu = 0.1;
  double alpha = 0.0;
  double beta = 5.0;
  SurrogateKind surrogate = SurrogateKind::GMF;
  double eps = 2e-4;
  double lambda = 0.97;
  double rls_delta = 0.2;
  double ds_gammabar = 0.0;
  double papa_r = 0.5;
  double m_fraction = 0.5;
  SelectionRule rule = SelectionRule::random;
  int period = 3;
  FeatureMatrixKind kind = FeatureMatrixKind::lowpass();
  bool plain_mu = false;  // LMS uses w + mu e x instead of w + 2 mu e x

  // hypercomplex scenarios
  std::string number_system = "quaternion";

  bool robustness = false;  // record g1/g2 (SM-NLMS and SM-AP only)
  int steady_window = 500;
  std::string out;
};

struct TrialTrace {
  std::vector<double> e2, dev2, mults, g1, g2;
  std::vector<int> condition_sign;
  std::vector<char> updated;
  std::size_t updates = 0, anomalies = 0, regularized = 0;
  Vec w_final;
  HVec<Quaternion> wq_final;
  HVec<Trinion> wt_final;
};

struct LearningCurve {
  std::vector<double> mse_db, update_rate_cum, g1, g2, dev2_db, mults;
  std::vector<std::size_t> updates_per_trial;
  int iterations = 0;
  std::size_t size() const { return mse_db.size(); }
};

struct ExperimentSummary {
  double update_rate = 0.0;
  double steady_update_rate = 0.0;
  double steady_mse_db = 0.0;
  double steady_mults = 0.0;
  std::size_t total_updates = 0, anomalies = 0, regularized = 0;
};

struct ExperimentResult {
  LearningCurve curve;
  ExperimentSummary summary;
};

inline double to_db(double v) { return v > 0 ? std::max(kDbFloor, 10.0 * std::log10(v)) : kDbFloor; }

// ---------------------------------------------------------------- validation

inline void validate(const ExperimentConfig& c) {
  if (c.trials < 1) throw ConfigError("trials must be >= 1");
  if (c.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (c.N < 0) throw ConfigError("N must be >= 0");
  if (c.L < 0) throw ConfigError("L must be >= 0");
  if (c.sigma_n2 < 0) throw ConfigError("sigma_n2 must be >= 0");
  if (c.gammabar < 0) throw ConfigError("gammabar must be >= 0");
  if (c.m_fraction <= 0 || c.m_fraction > 1) throw ConfigError("M-fraction must lie in (0, 1]");
  if (c.steady_window < 1) throw ConfigError("steady_window must be >= 1");
  if (c.mu < 0 || c.alpha < 0) throw ConfigError("mu and alpha must be >= 0");
  if (c.warmup < 0) throw ConfigError("warmup must be >= 0");
  if (c.warmup > 0 && c.robustness) throw ConfigError("robustness traces start from an empty tap line; use warmup = 0");
}

// ------------------------------------------------------------------- presets

inline const std::vector<std::string>& scenario_ids() {
  static const std::vector<std::string> ids = {"ch3-robust-smnlms", "ch3-robust-smap", "ch3-gamma-policies",
                                                "ch4-wind-synth",    "ch4-beamforming", "ch5-sysid",
                                                "ch5-equalizer",     "ch6-sysid",       "ch6-rls",
                                                "ch7-flms",          "ch7-lcf"};
  return ids;
}

inline ExperimentConfig scenario_preset(const std::string& id) {
  ExperimentConfig c;
  c.scenario = id;
  if (id == "ch3-robust-smnlms") {
    c.algo = "smnlms";
    c.N = 9;  // 10 coefficients
    c.iterations = 2500;
    c.gammabar = std::sqrt(5 * 0.01);
    c.robustness = true;
  } else if (id == "ch3-robust-smap") {
    c.algo = "smap";
    c.N = 9;
    c.L = 2;
    c.iterations = 1000;
    c.input = "ar1";
    c.ar_rho = 0.95;
    c.cv = CVPolicy::noise();
    c.robustness = true;
  } else if (id == "ch3-gamma-policies") {
    c.algo = "smnlms";
    c.N = 9;
    c.iterations = 2500;
    c.gamma_policy = "timevarying";
    c.robustness = true;
  } else if (id == "ch4-wind-synth") {
    c.task = Task::wind;
    c.algo = "smtnlms";
    c.number_system = "trinion";
    c.N = 7;  // filter length 8
    c.L = 1;
    c.iterations = 3000;
    c.mu = 0.9;
    c.gammabar = 2.3;
    c.trials = 20;
  } else if (id == "ch4-beamforming") {
    c.task = Task::beamforming;
    c.algo = "smqnlms";
    c.N = 9;  // 10 sensors
    c.L = 1;
    c.iterations = 10000;
    c.sigma_n2 = 0.01;
    c.gammabar = std::sqrt(2 * 0.01);
    c.mu = 0.009;
    c.trials = 10;
  } else if (id == "ch5-sysid") {
    c.algo = "smpuap";
    c.N = 79;
    c.L = 1;
    c.input = "bpsk";
    c.iterations = 10000;
    c.gammabar = std::sqrt(25 * 0.01);
    c.w0 = "ones";
    c.trials = 20;
  } else if (id == "ch5-equalizer") {
    c.task = Task::equalizer;
    c.algo = "ismpuap";
    c.system = "ch5_channel";
    c.N = 80;
    c.L = 3;
    c.delay = 45;
    c.input = "bpsk";
    c.iterations = 10000;
    c.gammabar = std::sqrt(25 * 0.01);
    c.w0 = "ones";
    c.trials = 10;
  } else if (id == "ch6-sysid") {
    c.algo = "is-smap";
    c.system = "ch6_wo";
    c.N = 14;
    c.L = 1;
    c.input = "bpsk";
    c.iterations = 1500;
    c.gammabar = std::sqrt(5 * 0.01);
    c.w0 = "0.001";
    c.eps = 2e-4;
    c.alpha = 5e-3;
    c.beta = 5;
    c.trials = 20;
  } else if (id == "ch6-rls") {
    c.algo = "asrls";
    c.system = "ch6_wo";
    c.N = 14;
    c.input = "ar1";
    c.ar_rho = 0.95;
    c.iterations = 1500;
    c.lambda = 0.97;
    c.rls_delta = 0.2;
    c.eps = 0.015;
    c.w0 = "ones";
    c.trials = 20;
  } else if (id == "ch7-flms") {
    c.algo = "flms";
    c.system = "ch7_lowpass_0.4";
    c.N = 39;
    c.iterations = 1500;
    c.snr_db = 20;
    c.mu = 0.03;
    c.alpha = 0.05;
    c.plain_mu = true;
    c.trials = 200;
  } else if (id == "ch7-lcf") {
    c.algo = "lcf";
    c.system = "ch7_lowpass_0.4";
    c.N = 39;
    c.iterations = 3000;
    c.snr_db = 20;
    c.mu = 0.003;
    c.eps = 0.02;
    c.input = "ar1";
    c.ar_rho = 0.99;
    c.unit_power = true;
    c.plain_mu = true;
    c.trials = 20;
  } else {
    throw ConfigError("unknown scenario: " + id);
  }
  return c;
}

// --------------------------------------------------------------- key=value

inline bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("not a boolean: " + v);
}

inline CVPolicy parse_cv(const std::string& v) {
  if (v == "simple") return CVPolicy::simple();
  if (v == "general") return CVPolicy::general();
  if (v == "zero") return CVPolicy::zero();
  if (v.rfind("noise", 0) == 0) {
    auto colon = v.find(':');
    return CVPolicy::noise(colon == std::string::npos ? 1.0 : std::stod(v.substr(colon + 1)));
  }
  throw ConfigError("unknown constraint vector: " + v);
}

inline SelectionRule parse_rule(const std::string& v) {
  if (v == "largest" || v == "largest_magnitude") return SelectionRule::largest_magnitude;
  if (v == "random") return SelectionRule::random;
  if (v == "fixed") return SelectionRule::fixed;
  throw ConfigError("unknown selection rule: " + v);
}

inline Task parse_task(const std::string& v) {
  if (v == "sysid") return Task::sysid;
  if (v == "equalizer") return Task::equalizer;
  if (v == "wind" || v == "wind-synth") return Task::wind;
  if (v == "beamforming") return Task::beamforming;
  throw ConfigError("unknown task: " + v);
}

// Applies one setting. Keys use the CLI flag spelling, with '-' or '_'.
inline void apply_setting(ExperimentConfig& c, std::string key, const std::string& v) {
  std::replace(key.begin(), key.end(), '-', '_');
  try {
    if (key == "scenario") c.scenario = v;
    else if (key == "task") c.task = parse_task(v);
    else if (key == "algo") c.algo = v;
    else if (key == "N" || key == "n" || key == "order") c.N = std::stoi(v);
    else if (key == "L" || key == "l") c.L = std::stoi(v);
    else if (key == "trials") c.trials = std::stoi(v);
    else if (key == "iterations") c.iterations = std::stoi(v);
    else if (key == "seed") c.seed = std::stoull(v);
    else if (key == "threads") c.threads = std::stoi(v);
    else if (key == "input") c.input = v;
    else if (key == "ar_rho") c.ar_rho = std::stod(v);
    else if (key == "unit_power") c.unit_power = parse_bool(v);
    else if (key == "ar_coeffs") {
      c.ar_coeffs.clear();
      std::stringstream ss(v);
      std::string tok;
      while (std::getline(ss, tok, ',')) c.ar_coeffs.push_back(std::stod(tok));
    } else if (key == "ar_delay") c.ar_delay = std::stoi(v);
    else if (key == "system") c.system = v;
    else if (key == "sigma_n2") c.sigma_n2 = std::stod(v);
    else if (key == "snr_db") c.snr_db = std::stod(v);
    else if (key == "noise_bound") c.noise_bound = std::stod(v);
    else if (key == "w0") c.w0 = v;
    else if (key == "delay") c.delay = std::stoi(v);
    else if (key == "warmup") c.warmup = std::stoi(v);
    else if (key == "gammabar") c.gammabar = std::stod(v);
    else if (key == "gamma_policy") c.gamma_policy = v;
    else if (key == "target_p") c.target_p = std::stod(v);
    else if (key == "cv") c.cv = parse_cv(v);
    else if (key == "delta") c.delta = std::stod(v);
    else if (key == "mu") c.mu = std::stod(v);
    else if (key == "alpha") c.alpha = std::stod(v);
    else if (key == "beta") c.beta = std::stod(v);
    else if (key == "surrogate") c.surrogate = parse_surrogate(v);
    else if (key == "eps") c.eps = std::stod(v);
    else if (key == "lambda") c.lambda = std::stod(v);
    else if (key == "rls_delta") c.rls_delta = std::stod(v);
    else if (key == "ds_gammabar") c.ds_gammabar = std::stod(v);
    else if (key == "papa_r") c.papa_r = std::stod(v);
    else if (key == "M_fraction" || key == "m_fraction") c.m_fraction = std::stod(v);
    else if (key == "rule") c.rule = parse_rule(v);
    else if (key == "period") c.period = std::stoi(v);
    else if (key == "kind") c.kind = parse_feature_kind(v, c.kind.param);
    else if (key == "kind_param") c.kind.param = std::stoi(v);
    else if (key == "plain_mu") c.plain_mu = parse_bool(v);
    else if (key == "number_system") c.number_system = v;
    else if (key == "robustness") c.robustness = parse_bool(v);
    else if (key == "steady_window") c.steady_window = std::stoi(v);
    else if (key == "out") c.out = v;
    else throw ConfigError("unknown setting: " + key);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("bad value for " + key + ": '" + v + "' (" + e.what() + ")");
  }
}

// Flat key=value lines; "[section]" headers only group keys; '#' and ';' comment.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const char* ws = " \t\r\n";
    s.erase(0, s.find_first_not_of(ws));
    s.erase(s.find_last_not_of(ws) + 1);
    return s;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find_first_of("#;"); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty() || (line.front() == '[' && line.back() == ']')) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return kv;
}

inline std::vector<std::pair<std::string, std::string>> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// SMF_OUT_DIR, falling back to the working directory.
inline std::string default_output_dir() {
  const char* v = std::getenv("SMF_OUT_DIR");
  return (v && *v) ? std::string(v) : std::string(".");
}

// ------------------------------------------------------------------ data

namespace detail {

inline InputSpec input_spec(const ExperimentConfig& c) {
  if (c.input == "white") return InputSpec::white();
  if (c.input == "bpsk") return InputSpec::binary();
  if (c.input == "ar1") return InputSpec::ar1(c.ar_rho, c.unit_power);
  if (c.input == "ar") {
    InputSpec s = InputSpec::ar(c.ar_coeffs, c.ar_delay);
    s.unit_power = c.unit_power;
    return s;
  }
  throw ConfigError("unknown input kind: " + c.input);
}

inline SystemModel make_system(const ExperimentConfig& c, Rng& rng) {
  if (c.system == "random") {
    Vec w(c.N + 1);
    for (int i = 0; i <= c.N; ++i) w(i) = rng.normal();
    return {w, "random"};
  }
  if (c.system.rfind("file:", 0) == 0) return load_system_file(c.system.substr(5));
  try {
    return load_system_preset(c.system);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

inline Vec initial_weights(const ExperimentConfig& c, int len) {
  if (c.w0 == "zeros") return Vec::Zero(len);
  if (c.w0 == "ones") return Vec::Ones(len);
  try {
    return Vec::Constant(len, std::stod(c.w0));
  } catch (const std::exception&) {
    throw ConfigError("bad w0: " + c.w0);
  }
}

inline double resolve_gammabar(const ExperimentConfig& c, double sigma_n2) {
  if (c.gamma_policy == "fixed" || c.gamma_policy == "timevarying") return c.gammabar;
  if (c.gamma_policy == "first_pass") return estimate_gammabar(c.target_p, sigma_n2, c.L, GammaMode::first_pass);
  if (c.gamma_policy == "emse_refined") return estimate_gammabar(c.target_p, sigma_n2, c.L, GammaMode::emse_refined);
  throw ConfigError("unknown gamma policy: " + c.gamma_policy);
}

struct RealData {
  Seq x;
  Desired dn;
  SystemModel sys;
  bool has_truth = false;
  double sigma_n2 = 0.0;
  long start = 0;  // first filtered sample
};

// SNR is taken against the input power, so 20 dB on a unit-power input is sigma_n2 = 0.01.
inline double input_power(const Seq& x, std::size_t from) {
  double p = 0.0;
  for (std::size_t k = from; k < x.size(); ++k) p += x[k] * x[k];
  return p / static_cast<double>(x.size() - from);
}

inline RealData make_real_data(const ExperimentConfig& c, std::size_t trial) {
  Rng base = Rng::for_trial(c.seed, trial);
  Rng sys_rng = base.split(1), in_rng = base.split(2), noise_rng = base.split(3);
  RealData r;
  r.sys = make_system(c, sys_rng);
  const auto len = static_cast<std::size_t>(c.iterations + c.warmup);
  r.start = c.warmup;
  if (c.task == Task::sysid) {
    if (static_cast<int>(r.sys.size()) != c.N + 1)
      throw ConfigError("system has " + std::to_string(r.sys.size()) + " coefficients but N+1 = " +
                        std::to_string(c.N + 1));
    r.x = gen_input(input_spec(c), len, in_rng);
    r.sigma_n2 = std::isnan(c.snr_db) ? c.sigma_n2 : input_power(r.x, static_cast<std::size_t>(r.start)) / std::pow(10.0, c.snr_db / 10.0);
    if (c.noise_bound > 0) r.dn = synth_desired_bounded(r.sys, r.x, c.noise_bound, noise_rng);
    else r.dn = synth_desired(r.sys, r.x, r.sigma_n2, noise_rng);
    if (c.noise_bound > 0) r.sigma_n2 = c.noise_bound * c.noise_bound / 3.0;
    r.has_truth = true;
  } else {
    // channel equalization: filter input is the noisy channel output, reference is the delayed symbol
    Seq s = gen_input(input_spec(c), len, in_rng);
    r.sigma_n2 = c.sigma_n2;
    Desired ch = synth_desired(r.sys, s, c.sigma_n2, noise_rng);
    r.x = ch.d;
    r.dn.d.assign(len, 0.0);
    r.dn.n = ch.n;
    for (std::size_t k = 0; k < len; ++k) r.dn.d[k] = at_or_zero(s, static_cast<long>(k) - c.delay);
  }
  return r;
}

}  // namespace detail

// ------------------------------------------------------------- real filters

namespace detail {

struct StepOut {
  double e = 0.0;
  bool updated = false, anomaly = false, regularized = false;
  long long mults = 0;
};

inline StepOut from_decision(const UpdateDecision& d, long long mults) {
  return {d.e, d.updated, d.anomaly, d.regularized, mults};
}

inline TrialTrace robustness_trial(const ExperimentConfig& c, const RealData& data) {
  TrialTrace t;
  const auto len = data.x.size();
  const double gb = resolve_gammabar(c, data.sigma_n2);
  Vec w0 = initial_weights(c, c.N + 1);
  t.e2.resize(len);
  t.dev2.resize(len);
  t.mults.assign(len, static_cast<double>(c.N + 1));
  t.g1.resize(len);
  t.g2.resize(len);
  t.condition_sign.assign(len, 0);
  t.updated.resize(len);
  if (c.algo == "smnlms") {
    std::optional<TimeVaryingGamma> tv;
    if (c.gamma_policy == "timevarying") tv.emplace(20, 4, data.sigma_n2, 5.0, 9.0);
    NlmsTrace tr = trace_smnlms(data.sys, data.x, data.dn, gb, c.delta, w0, tv ? &*tv : nullptr);
    t.w_final = tr.w_final;
    for (std::size_t k = 0; k < len; ++k) {
      const auto& r = tr.steps[k];
      const double e = r.etilde + r.n;
      t.e2[k] = e * e;
      t.dev2[k] = r.dev2_next;
      t.updated[k] = r.updated;
      t.updates += r.updated;
      LocalCheck lc = smnlms_local_check(tr, k);
      t.g1[k] = lc.g1;
      t.g2[k] = lc.g2;
    }
  } else if (c.algo == "smap") {
    ApTrace tr = trace_smap(data.sys, data.x, data.dn, c.L, gb, c.cv, c.delta, w0);
    t.w_final = tr.w_final;
    for (std::size_t k = 0; k < len; ++k) {
      const auto& r = tr.steps[k];
      const double e = r.etilde(0) + r.n(0);
      t.e2[k] = e * e;
      t.dev2[k] = r.dev2_next;
      t.updated[k] = r.updated;
      t.updates += r.updated;
      LocalCheck lc = smap_local_check(tr, k);
      t.g1[k] = lc.g1;
      t.g2[k] = lc.g2;
      t.condition_sign[k] = lc.condition_sign;
    }
  } else {
    throw ConfigError("robustness recording is only available for smnlms and smap");
  }
  return t;
}

}  // namespace detail

inline TrialTrace run_real_trial(const ExperimentConfig& c, std::size_t trial) {
  using detail::StepOut;
  detail::RealData data = detail::make_real_data(c, trial);
  if (c.robustness) return detail::robustness_trial(c, data);

  const int n = c.N + 1;
  const auto len = static_cast<std::size_t>(c.iterations);
  const double gb = detail::resolve_gammabar(c, data.sigma_n2);
  const long long out_mults = n;
  Rng algo_rng = Rng::for_trial(c.seed, trial).split(4);
  const int M = std::max(1, static_cast<int>(std::lround(c.m_fraction * n)));
  const L0Surrogate sur{c.surrogate, c.beta};

  FilterState fs(detail::initial_weights(c, n));
  DiscardState ds(fs.w);
  SparseRLSState rs;
  LCFState lcf;
  std::optional<TimeVaryingGamma> tv;
  const Vec* wref = &fs.w;
  RegressorWindow win;
  Vec nvec(c.L + 1);

  std::function<StepOut(long)> step;
  const std::string& a = c.algo;
  auto window = [&](long k) {
    fill_window(data.x, data.dn.d, k, c.N, c.L, win);
    for (int j = 0; j <= c.L; ++j) nvec(j) = at_or_zero(data.dn.n, k - j);
  };
  if (a == "lms") {
    step = [&](long k) {
      Vec x = tap_vector(data.x, k, c.N);
      double e = c.plain_mu ? flms_step(fs, x, data.dn.d[k], c.mu, 0.0, c.kind) : lms_step(fs, x, data.dn.d[k], c.mu);
      return StepOut{e, true, false, false, out_mults};
    };
  } else if (a == "nlms") {
    step = [&](long k) {
      Vec x = tap_vector(data.x, k, c.N);
      return StepOut{nlms_step(fs, x, data.dn.d[k], c.mu, c.delta), true, false, false, out_mults};
    };
  } else if (a == "ap") {
    step = [&](long k) {
      window(k);
      Vec e = ap_step(fs, win, c.mu, c.delta);
      return StepOut{e(0), true, false, false, out_mults};
    };
  } else if (a == "rls") {
    fs = rls_init(c.N, c.rls_delta);
    wref = &fs.w;
    step = [&](long k) {
      Vec x = tap_vector(data.x, k, c.N);
      return StepOut{rls_step(fs, x, data.dn.d[k], c.lambda), true, false, false, out_mults};
    };
  } else if (a == "smnlms") {
    if (c.gamma_policy == "timevarying") tv.emplace(20, 4, data.sigma_n2, 5.0, 9.0);
    step = [&](long k) {
      Vec x = tap_vector(data.x, k, c.N);
      const double g = tv ? tv->current() : gb;
      auto d = smnlms_step(fs, x, data.dn.d[k], g, c.delta);
      if (tv) tv->record(d.updated);
      return detail::from_decision(d, out_mults);
    };
  } else if (a == "smap") {
    step = [&](long k) {
      window(k);
      return detail::from_decision(smap_step(fs, win, gb, c.cv, c.delta, &nvec), out_mults);
    };
  } else if (a == "smpuap" || a == "ismpuap") {
    const bool improved = a == "ismpuap";
    step = [&, improved](long k) {
      window(k);
      IndexSet idx = select_index_set(fs.w, M, c.rule, algo_rng);
      auto d = improved ? ismpuap_step(fs, win, gb, idx, c.delta) : smpuap_step(fs, win, gb, c.cv, idx, c.delta, &nvec);
      return detail::from_decision(d, out_mults);
    };
  } else if (a == "ssmap") {
    step = [&](long k) {
      window(k);
      return detail::from_decision(ssmap_step(fs, win, gb, c.cv, c.alpha, sur, c.delta, &nvec), out_mults);
    };
  } else if (a == "smpapa") {
    step = [&](long k) {
      window(k);
      return detail::from_decision(smpapa_step(fs, win, gb, c.cv, c.papa_r, c.delta, &nvec), out_mults);
    };
  } else if (a == "s-smap" || a == "is-smap") {
    const bool improved = a == "is-smap";
    step = [&, improved](long k) {
      window(k);
      auto d = improved ? is_smap_step(fs, win, gb, c.cv, c.eps, c.delta, &nvec)
                        : s_smap_step(fs, win, gb, c.cv, c.eps, c.delta, &nvec);
      return detail::from_decision(d, out_mults);
    };
  } else if (a == "d-smap") {
    wref = &ds.w;
    step = [&](long k) {
      window(k);
      return detail::from_decision(d_smap_step(ds, win, gb, c.cv, c.eps, c.delta, &nvec), out_mults);
    };
  } else if (a == "srls" || a == "asrls" || a == "l0rls" || a == "al0rls") {
    rs = sparse_rls_init(fs.w, c.rls_delta, c.lambda);
    wref = &rs.w;
    const RlsVariant var = (a == "asrls" || a == "al0rls") ? RlsVariant::alternative : RlsVariant::standard;
    const bool l0 = a == "l0rls" || a == "al0rls";
    step = [&, var, l0](long k) {
      Vec x = tap_vector(data.x, k, c.N);
      const double d = data.dn.d[k];
      auto inner = [&](SparseRLSState& s, const Vec& xx, double dd) {
        l0 ? l0rls_step(s, xx, dd, c.alpha, sur, var) : srls_step(s, xx, dd, c.eps, var);
      };
      if (c.ds_gammabar > 0) return detail::from_decision(ds_gate_wrap(rs, x, d, c.ds_gammabar, inner), out_mults);
      const double e = d - x.dot(rs.w);
      inner(rs, x, d);
      return StepOut{e, true, false, false, out_mults};
    };
  } else if (a == "flms") {
    step = [&](long k) {
      Vec x = tap_vector(data.x, k, c.N);
      return StepOut{flms_step(fs, x, data.dn.d[k], c.mu, c.alpha, c.kind), true, false, false, out_mults};
    };
  } else if (a == "lcf" || a == "ilcf" || a == "alcf" || a == "ailcf") {
    lcf = LCFState(n, parse_lcf_variant(a), c.period);
    lcf.w = fs.w;
    lcf.w_s = (a == "alcf" || a == "ailcf") ? alt_feature_fn(lcf.w, c.eps, c.period) : feature_fn(lcf.w, c.eps);
    lcf.b = indicator(lcf.w, c.eps);
    wref = &lcf.w;
    step = [&](long k) {
      Vec x = tap_vector(data.x, k, c.N);
      LcfStep r = lcflms_step(lcf, x, data.dn.d[k], c.mu, c.eps);
      return StepOut{r.e, true, false, false, r.out.mults};
    };
  } else {
    throw ConfigError("unknown algorithm: " + a);
  }

  TrialTrace t;
  t.e2.resize(len);
  t.mults.resize(len);
  t.updated.resize(len);
  if (data.has_truth) t.dev2.resize(len);
  for (std::size_t k = 0; k < len; ++k) {
    StepOut o = step(data.start + static_cast<long>(k));
    t.e2[k] = o.e * o.e;
    t.mults[k] = static_cast<double>(o.mults);
    t.updated[k] = o.updated;
    t.updates += o.updated;
    t.anomalies += o.anomaly;
    t.regularized += o.regularized;
    if (data.has_truth) t.dev2[k] = (data.sys.w_o - *wref).squaredNorm();
  }
  t.w_final = *wref;
  return t;
}

// ------------------------------------------------------- hypercomplex tasks

namespace detail {

// u(k) = A u(k-1) + v(k), A = rho [(1 - c) I + c J / 3]; a correlated 3-axis wind surrogate.
inline std::vector<Eigen::Vector3d> wind_series(std::size_t len, Rng& rng, double rho = 0.95, double coupling = 0.3) {
  Eigen::Matrix3d A = rho * ((1.0 - coupling) * Eigen::Matrix3d::Identity() +
                             (coupling / 3.0) * Eigen::Matrix3d::Ones());
  std::vector<Eigen::Vector3d> u(len);
  Eigen::Vector3d prev = Eigen::Vector3d::Zero();
  for (int burn = 0; burn < 200; ++burn) prev = A * prev + Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
  for (auto& v : u) prev = v = A * prev + Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
  return u;
}

template <class T>
T from_wind(const Eigen::Vector3d& v) {
  if constexpr (std::is_same_v<T, Trinion>) return Trinion{v(0), v(1), v(2)};
  else return Quaternion{0.0, v(0), v(1), v(2)};
}

// Runs one hypercomplex algorithm over snapshot regressors.
template <class T>
TrialTrace hc_loop(const ExperimentConfig& c, const std::vector<HVec<T>>& xs, const HVec<T>& d, const std::string& fam) {
  const std::size_t len = xs.size();
  const std::size_t taps = xs.empty() ? 0 : xs[0].size();
  HCFilterState<T> s(taps);
  TrialTrace t;
  t.e2.resize(len);
  t.mults.assign(len, 0.0);
  t.updated.resize(len);
  for (std::size_t k = 0; k < len; ++k) {
    double e2 = 0.0;
    bool up = true;
    const long kk = static_cast<long>(k);
    if (fam == "smnlms") {
      auto dec = smhnlms_step(s, xs[k], d[k], c.gammabar, c.delta);
      e2 = dec.e * dec.e;
      up = dec.updated;
    } else if (fam == "smap") {
      auto dec = smhap_step(s, hc_window_from_snapshots(xs, d, kk, c.L), c.gammabar, c.cv, c.delta);
      e2 = dec.e * dec.e;
      up = dec.updated;
    } else if (fam == "nlms") {
      e2 = norm2(hnlms_step(s, xs[k], d[k], c.mu, c.delta));
    } else if (fam == "ap") {
      e2 = norm2(hap_step(s, hc_window_from_snapshots(xs, d, kk, c.L), c.mu, c.delta)[0]);
    } else if (fam == "lms") {
      e2 = norm2(hlms_step(s, xs[k], d[k], c.mu));
    } else {
      throw ConfigError("unknown hypercomplex algorithm family: " + fam);
    }
    t.e2[k] = e2;
    t.updated[k] = up;
    t.updates += up;
  }
  if constexpr (std::is_same_v<T, Quaternion>) t.wq_final = s.w;
  else t.wt_final = s.w;
  return t;
}

// "smqnlms" -> ('q', "smnlms"), "tap" -> ('t', "ap")
inline std::pair<char, std::string> split_hc_algo(const std::string& a) {
  std::string sm, rest = a;
  if (rest.rfind("sm", 0) == 0) {
    sm = "sm";
    rest = rest.substr(2);
  }
  if (rest.empty() || (rest[0] != 'q' && rest[0] != 't')) throw ConfigError("unknown hypercomplex algorithm: " + a);
  const std::string fam = sm + rest.substr(1);
  static const std::vector<std::string> ok = {"smnlms", "smap", "nlms", "ap", "lms"};
  if (std::find(ok.begin(), ok.end(), fam) == ok.end()) throw ConfigError("unknown hypercomplex algorithm: " + a);
  return {rest[0], fam};
}

}  // namespace detail

struct BeamScene {
  std::vector<HVec<Quaternion>> xs;
  HVec<Quaternion> d;
};

// Desired BPSK from broadside, two interferers at SIR -10 dB, quaternion sensor noise.
inline BeamScene make_beam_scene(const ExperimentConfig& c, std::size_t trial) {
  constexpr double pi = std::numbers::pi;
  Rng rng = Rng::for_trial(c.seed, trial).split(2);
  const int M = c.N + 1;
  SteeringConfig sd{M, 0.5, 0.0, pi / 2, 0.0, 0.0};
  SteeringConfig s1{M, 0.5, pi / 9, pi / 2, 0.0, 0.0};
  SteeringConfig s2{M, 0.5, pi / 6, -pi / 2, 0.0, 0.0};
  auto vd = steering_vector(sd), v1 = steering_vector(s1), v2 = steering_vector(s2);
  const double ia = std::sqrt(10.0), ns = std::sqrt(c.sigma_n2 / 4.0);
  BeamScene sc;
  sc.xs.resize(static_cast<std::size_t>(c.iterations));
  sc.d.resize(static_cast<std::size_t>(c.iterations));
  for (int k = 0; k < c.iterations; ++k) {
    const double s = rng.bpsk(), i1 = ia * rng.normal(), i2 = ia * rng.normal();
    HVec<Quaternion> x(M);
    for (int m = 0; m < M; ++m)
      x[m] = s * vd[m] + i1 * v1[m] + i2 * v2[m] +
             Quaternion{ns * rng.normal(), ns * rng.normal(), ns * rng.normal(), ns * rng.normal()};
    sc.xs[k] = std::move(x);
    sc.d[k] = Quaternion{s};
  }
  return sc;
}

inline TrialTrace run_hc_trial(const ExperimentConfig& c, std::size_t trial) {
  auto [sys, fam] = detail::split_hc_algo(c.algo);
  if (c.task == Task::beamforming) {
    if (sys != 'q') throw ConfigError("beamforming uses quaternion algorithms");
    BeamScene sc = make_beam_scene(c, trial);
    return detail::hc_loop<Quaternion>(c, sc.xs, sc.d, fam);
  }
  Rng rng = Rng::for_trial(c.seed, trial).split(2);
  auto u = detail::wind_series(static_cast<std::size_t>(c.iterations), rng);
  auto run = [&](auto tag) {
    using T = decltype(tag);
    HVec<T> series(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) series[k] = detail::from_wind<T>(u[k]);
    std::vector<HVec<T>> xs(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) xs[k] = hc_tap_vector(series, static_cast<long>(k) - 1, c.N);
    return detail::hc_loop<T>(c, xs, series, fam);
  };
  return sys == 't' ? run(Trinion{}) : run(Quaternion{});
}

// -------------------------------------------------------------- experiment

// Deterministic given (cfg, trial_index).
inline TrialTrace run_trial(const ExperimentConfig& c, std::size_t trial_index) {
  validate(c);
  if (c.task == Task::wind || c.task == Task::beamforming) return run_hc_trial(c, trial_index);
  return run_real_trial(c, trial_index);
}

namespace detail {
// Runs trials [from, to) on worker threads; results land at their own index.
inline std::vector<TrialTrace> run_batch(const ExperimentConfig& c, std::size_t from, std::size_t to) {
  std::vector<TrialTrace> out(to - from);
  unsigned hw = c.threads > 0 ? static_cast<unsigned>(c.threads) : std::max(1u, std::thread::hardware_concurrency());
  hw = std::min<unsigned>(hw, static_cast<unsigned>(to - from));
  if (hw <= 1) {
    for (std::size_t i = from; i < to; ++i) out[i - from] = run_trial(c, i);
    return out;
  }
  std::atomic<std::size_t> next{from};
  std::vector<std::exception_ptr> errs(hw);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < hw; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < to; i = next++) out[i - from] = run_trial(c, i);
      } catch (...) {
        errs[w] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}
}  // namespace detail

// Mean learning curve over trials. Trials are merged in index order, so the
// result does not depend on how they were scheduled.
inline ExperimentResult run_experiment(const ExperimentConfig& c) {
  validate(c);
  const std::size_t K = static_cast<std::size_t>(c.iterations);
  const std::size_t T = static_cast<std::size_t>(c.trials);
  std::vector<double> e2(K, 0.0), dev2(K, 0.0), mults(K, 0.0), g1(K, 0.0), g2(K, 0.0), cum(K, 0.0);
  bool has_dev = false, has_g = false;
  ExperimentResult res;
  const std::size_t win = std::min<std::size_t>(K, static_cast<std::size_t>(c.steady_window));
  double steady_updates = 0.0;
  constexpr std::size_t kBatch = 64;
  for (std::size_t from = 0; from < T; from += kBatch) {
    auto batch = detail::run_batch(c, from, std::min(T, from + kBatch));
    for (const auto& t : batch) {
      std::size_t running = 0;
      has_dev = !t.dev2.empty();
      has_g = !t.g1.empty();
      for (std::size_t k = 0; k < K; ++k) {
        e2[k] += t.e2[k];
        mults[k] += t.mults[k];
        running += t.updated[k];
        cum[k] += static_cast<double>(running) / static_cast<double>(k + 1);
        if (has_dev) dev2[k] += t.dev2[k];
        if (has_g) {
          g1[k] += t.g1[k];
          g2[k] += t.g2[k];
        }
        if (k >= K - win) steady_updates += t.updated[k];
      }
      res.curve.updates_per_trial.push_back(t.updates);
      res.summary.total_updates += t.updates;
      res.summary.anomalies += t.anomalies;
      res.summary.regularized += t.regularized;
    }
  }
  const double inv = 1.0 / static_cast<double>(T);
  LearningCurve& lc = res.curve;
  lc.iterations = c.iterations;
  lc.mse_db.resize(K);
  lc.update_rate_cum.resize(K);
  lc.mults.resize(K);
  double steady_mse = 0.0, steady_mults = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    lc.mse_db[k] = to_db(e2[k] * inv);
    lc.update_rate_cum[k] = cum[k] * inv;
    lc.mults[k] = mults[k] * inv;
    if (k >= K - win) {
      steady_mse += e2[k] * inv;
      steady_mults += mults[k] * inv;
    }
  }
  if (has_dev) {
    lc.dev2_db.resize(K);
    for (std::size_t k = 0; k < K; ++k) lc.dev2_db[k] = to_db(dev2[k] * inv);
  }
  if (has_g) {
    lc.g1.resize(K);
    lc.g2.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      lc.g1[k] = g1[k] * inv;
      lc.g2[k] = g2[k] * inv;
    }
  }
  res.summary.update_rate = static_cast<double>(res.summary.total_updates) / static_cast<double>(K * T);
  res.summary.steady_update_rate = steady_updates / static_cast<double>(win * T);
  res.summary.steady_mse_db = to_db(steady_mse / static_cast<double>(win));
  res.summary.steady_mults = steady_mults / static_cast<double>(win);
  return res;
}

// Most frequent value over the last `window` entries; ties go to the smaller value.
inline double steady_mode(const std::vector<double>& v, std::size_t window) {
  if (v.empty()) return 0.0;
  window = std::min(window, v.size());
  std::map<double, std::size_t> freq;
  for (std::size_t k = v.size() - window; k < v.size(); ++k) ++freq[v[k]];
  return std::max_element(freq.begin(), freq.end(), [](auto& a, auto& b) { return a.second < b.second; })->first;
}

// ------------------------------------------------------------------- CSV

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write CSV file: " + path);
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_field(r[i]);
    out << "\r\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read CSV file: " + path);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  char ch;
  while (in.get(ch)) {
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get(ch);
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (ch != '\r') {
      field += ch;
    }
  }
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

// Columns: k, mse_db, update_rate_cum, g1, g2, dev2_db, mults. Absent series stay empty.
inline void export_csv(const LearningCurve& c, const std::string& path) {
  const std::vector<std::string> header = {"k", "mse_db", "update_rate_cum", "g1", "g2", "dev2_db", "mults"};
  std::vector<std::vector<std::string>> rows;
  rows.reserve(c.size());
  auto opt = [](const std::vector<double>& v, std::size_t k) { return k < v.size() ? fmt17(v[k]) : std::string(); };
  for (std::size_t k = 0; k < c.size(); ++k)
    rows.push_back({std::to_string(k), fmt17(c.mse_db[k]), opt(c.update_rate_cum, k), opt(c.g1, k), opt(c.g2, k),
                    opt(c.dev2_db, k), opt(c.mults, k)});
  write_csv(path, header, rows);
}

// Per-iteration record of one trial: k, e2, updated, g1, g2, condition_sign, dev2, mults.
inline void export_csv(const TrialTrace& t, const std::string& path) {
  const std::vector<std::string> header = {"k", "e2", "updated", "g1", "g2", "condition_sign", "dev2", "mults"};
  std::vector<std::vector<std::string>> rows;
  auto opt = [](const std::vector<double>& v, std::size_t k) { return k < v.size() ? fmt17(v[k]) : std::string(); };
  for (std::size_t k = 0; k < t.e2.size(); ++k)
    rows.push_back({std::to_string(k), fmt17(t.e2[k]), std::to_string(int(t.updated[k])), opt(t.g1, k), opt(t.g2, k),
                    k < t.condition_sign.size() ? std::to_string(t.condition_sign[k]) : std::string(),
                    opt(t.dev2, k), opt(t.mults, k)});
  write_csv(path, header, rows);
}

}  // namespace smf
