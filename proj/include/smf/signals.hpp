#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace smf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Seq = std::vector<double>;

// Seedable generator. Trial streams are seed + trial index.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), eng_(seed) {}
  static Rng for_trial(std::uint64_t seed, std::uint64_t trial) { return Rng(seed + trial); }
  Rng split(std::uint64_t k) const { return Rng(seed_ * 0x9E3779B97F4A7C15ULL + k + 1); }

  double normal() { return gauss_(eng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double bpsk() { return (eng_() >> 63) ? 1.0 : -1.0; }
  std::uint64_t index(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng_); }
  std::mt19937_64& engine() { return eng_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

enum class InputKind { white_gaussian, bpsk, ar1, ar_custom };

// x(k) = sum_i coeffs[i] x(k-1-i) + m(k - drive_delay), m unit-variance Gaussian.
// ar1(rho) is coeffs = {rho}, drive_delay = 1, i.e. x(k) = rho x(k-1) + m(k-1).
struct InputSpec {
  InputKind kind = InputKind::white_gaussian;
  std::vector<double> coeffs;
  int drive_delay = 1;
  bool unit_power = false;  // rescale the AR drive so that var(x) is 1

  static InputSpec white() { return {}; }
  static InputSpec binary() { return {InputKind::bpsk, {}, 0, false}; }
  static InputSpec ar1(double rho, bool unit_power = false) { return {InputKind::ar1, {rho}, 1, unit_power}; }
  static InputSpec ar(std::vector<double> c, int delay) { return {InputKind::ar_custom, std::move(c), delay, false}; }
};

inline bool ar_stable(const std::vector<double>& c) {
  const int p = static_cast<int>(c.size());
  if (p == 0) return true;
  Mat C = Mat::Zero(p, p);
  for (int i = 0; i < p; ++i) C(0, i) = c[i];
  for (int i = 1; i < p; ++i) C(i, i - 1) = 1.0;
  return C.eigenvalues().cwiseAbs().maxCoeff() < 1.0;
}

// Stationary variance of an AR process driven by unit-variance white noise.
inline double ar_variance(const std::vector<double>& c) {
  // Impulse-response energy; converges for stable filters.
  const int p = static_cast<int>(c.size());
  std::vector<double> h(20000, 0.0);
  double acc = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    double v = (k == 0) ? 1.0 : 0.0;
    for (int i = 0; i < p; ++i)
      if (k >= static_cast<std::size_t>(i + 1)) v += c[i] * h[k - i - 1];
    h[k] = v;
    acc += v * v;
  }
  return acc;
}

inline Seq gen_input(const InputSpec& spec, std::size_t len, Rng& rng) {
  if (len == 0) throw std::invalid_argument("gen_input: len must be positive");
  Seq x(len, 0.0);
  switch (spec.kind) {
    case InputKind::white_gaussian:
      for (auto& v : x) v = rng.normal();
      return x;
    case InputKind::bpsk:
      for (auto& v : x) v = rng.bpsk();
      return x;
    case InputKind::ar1:
    case InputKind::ar_custom: break;
  }
  const auto& c = spec.coeffs;
  if (spec.kind == InputKind::ar1 && (c.size() != 1 || std::abs(c[0]) >= 1.0))
    throw std::invalid_argument("gen_input: ar1 needs |rho| < 1");
  if (!ar_stable(c)) throw std::invalid_argument("gen_input: unstable AR coefficients");
  const double g = spec.unit_power ? 1.0 / std::sqrt(ar_variance(c)) : 1.0;
  const int D = spec.drive_delay;
  Seq m(len, 0.0);
  for (auto& v : m) v = g * rng.normal();
  for (std::size_t k = 0; k < len; ++k) {
    double v = (k >= static_cast<std::size_t>(D)) ? m[k - D] : 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
      if (k >= i + 1) v += c[i] * x[k - i - 1];
    x[k] = v;
  }
  return x;
}

inline Seq gen_input(const InputSpec& spec, std::size_t len, std::uint64_t seed) {
  Rng rng(seed);
  return gen_input(spec, len, rng);
}

struct SystemModel {
  Vec w_o;
  std::string label;
  std::size_t size() const { return static_cast<std::size_t>(w_o.size()); }
};

inline SystemModel random_gaussian_system(int N, std::uint64_t seed) {
  Rng rng(seed);
  Vec w(N + 1);
  for (int i = 0; i <= N; ++i) w(i) = rng.normal();
  return {w, "random_gaussian(" + std::to_string(N) + "," + std::to_string(seed) + ")"};
}

namespace detail {
inline Vec from_list(std::initializer_list<double> v) {
  Vec w(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) w(i++) = x;
  return w;
}
inline Vec ch7_block_low() {
  Vec w = Vec::Zero(40);
  for (int i = 10; i <= 14; ++i) w(i) = 0.05 * (i - 9);
  for (int i = 15; i <= 24; ++i) w(i) = 0.3;
  for (int i = 25; i <= 29; ++i) w(i) = 0.3 - 0.05 * (i - 24);
  return w;
}
}  // namespace detail

inline SystemModel load_system_preset(const std::string& name) {
  using detail::from_list;
  if (name == "ch6_wo")
    return {from_list({24e-2, 2e-8, -23e-2, -3e-7, 5e-1, -1e-9, 2e-1, 1e-7, -5e-8, 12e-6, 1e-8, -5e-6, 4e-6,
                       -1e-7, -2e-1}), name};
  if (name == "ch6_wo_prime")
    return {from_list({2e-7, -21e-10, 17e-8, 21e-8, -3e-7, 24e-2, 7e-1, 2e-1, 33e-2, -6e-1, -5e-7, 18e-9, -5e-7,
                       21e-8, -11e-8}), name};
  if (name == "ch6_wo_dprime")
    return {from_list({2e-8, -1e-9, 1e-7, -3e-7, -64e-3, 2e-1, 5e-1, 2e-1, -64e-3, -5e-5, 12e-6, 1e-8, -5e-6,
                       4e-6, -1e-5}), name};
  if (name == "ch5_channel") return {from_list({1, 2, 3, 4, 4, 3, 2, 1}), name};
  if (name == "ch7_lowpass_0.4") return {Vec::Constant(40, 0.4), name};
  if (name == "ch7_highpass_alt") {
    Vec w(40);
    for (int i = 0; i < 40; ++i) w(i) = (i % 2 == 0) ? 0.4 : -0.4;
    return {w, name};
  }
  if (name == "ch7_interp_low") {
    Vec w = Vec::Zero(40);
    for (int i = 0; i < 40; i += 2) w(i) = 0.4;
    return {w, name};
  }
  if (name == "ch7_interp_high") {
    Vec w = Vec::Zero(40);
    for (int i = 0; i < 40; i += 2) w(i) = (i % 4 == 0) ? 0.4 : -0.4;
    return {w, name};
  }
  if (name == "ch7_block_low") return {detail::ch7_block_low(), name};
  if (name == "ch7_block_high") {
    Vec w = detail::ch7_block_low();
    for (int i = 0; i < 40; ++i) w(i) *= (i % 2 == 0) ? -1.0 : 1.0;
    return {w, name};
  }
  if (name == "ch7_block_low_lcf") {
    Vec w = Vec::Zero(40);
    for (int i = 10; i <= 17; ++i) w(i) = 0.04 + 0.01 * (i - 9);
    for (int i = 18; i <= 21; ++i) w(i) = 0.5;
    for (int i = 22; i <= 29; ++i) w(i) = 0.13 - 0.01 * (i - 21);
    return {w, name};
  }
  // random_gaussian(N,seed)
  const std::string pre = "random_gaussian(";
  if (name.rfind(pre, 0) == 0 && name.back() == ')') {
    std::string args = name.substr(pre.size(), name.size() - pre.size() - 1);
    auto comma = args.find(',');
    if (comma != std::string::npos) {
      try {
        int N = std::stoi(args.substr(0, comma));
        auto seed = static_cast<std::uint64_t>(std::stoull(args.substr(comma + 1)));
        if (N >= 0) return random_gaussian_system(N, seed);
      } catch (const std::exception&) {
      }
    }
  }
  throw std::invalid_argument("unknown system preset: " + name);
}

// One real per line; '#' starts a comment.
inline SystemModel load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open coefficient file: " + path);
  std::vector<double> v;
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ss(line);
    double x;
    if (ss >> x) v.push_back(x);
  }
  if (v.empty()) throw std::runtime_error("no coefficients in " + path);
  return {Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size())), path};
}

enum class NoiseKind { gaussian, uniform };

struct Desired {
  Seq d;
  Seq n;
};

// d(k) = w_o^T x(k) + n(k) with zero pre-history. Uniform noise lies on
// [-B, B] with B = sqrt(3 sigma_n2) so the variance is still sigma_n2.
inline Desired synth_desired(const SystemModel& sys, const Seq& x, double sigma_n2, Rng& rng,
                             NoiseKind kind = NoiseKind::gaussian) {
  if (sigma_n2 < 0) throw std::invalid_argument("synth_desired: negative noise variance");
  const auto len = x.size();
  const auto M = sys.size();
  Desired out{Seq(len, 0.0), Seq(len, 0.0)};
  const double sd = std::sqrt(sigma_n2);
  const double B = std::sqrt(3.0 * sigma_n2);
  for (std::size_t k = 0; k < len; ++k) {
    double y = 0.0;
    for (std::size_t i = 0; i < M && i <= k; ++i) y += sys.w_o(static_cast<Eigen::Index>(i)) * x[k - i];
    double n = 0.0;
    if (sigma_n2 > 0) n = (kind == NoiseKind::gaussian) ? sd * rng.normal() : rng.uniform(-B, B);
    out.n[k] = n;
    out.d[k] = y + n;
  }
  return out;
}

// Bounded noise on [-B, B] for the known-bound experiments.
inline Desired synth_desired_bounded(const SystemModel& sys, const Seq& x, double B, Rng& rng) {
  return synth_desired(sys, x, B * B / 3.0, rng, NoiseKind::uniform);
}

struct RegressorWindow {
  Mat X;  // (N+1) x (L+1), column j is x(k-j)
  Vec d;  // (L+1), d(k-j)
  int N = 0;
  int L = 0;
  Vec x() const { return X.col(0); }
};

inline double at_or_zero(const Seq& s, long idx) {
  return (idx >= 0 && idx < static_cast<long>(s.size())) ? s[static_cast<std::size_t>(idx)] : 0.0;
}

// Refills an existing window; avoids reallocation inside hot loops.
inline void fill_window(const Seq& x, const Seq& d, long k, int N, int L, RegressorWindow& win) {
  if (win.X.rows() != N + 1 || win.X.cols() != L + 1) win.X.resize(N + 1, L + 1);
  if (win.d.size() != L + 1) win.d.resize(L + 1);
  win.N = N;
  win.L = L;
  for (int j = 0; j <= L; ++j) {
    for (int i = 0; i <= N; ++i) win.X(i, j) = at_or_zero(x, k - j - i);
    win.d(j) = at_or_zero(d, k - j);
  }
}

inline RegressorWindow window_at(const Seq& x, const Seq& d, long k, int N, int L) {
  RegressorWindow w;
  fill_window(x, d, k, N, L, w);
  return w;
}

inline Vec tap_vector(const Seq& x, long k, int N) {
  Vec v(N + 1);
  for (int i = 0; i <= N; ++i) v(i) = at_or_zero(x, k - i);
  return v;
}

}  // namespace smf
