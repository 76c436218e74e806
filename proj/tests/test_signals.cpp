#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <numeric>

#include <smf/signals.hpp>

using namespace smf;

namespace {
double lag1(const Seq& x) {
  double num = 0, den = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    den += x[k] * x[k];
    if (k) num += x[k] * x[k - 1];
  }
  return num / den;
}
double power(const Seq& x) {
  return std::inner_product(x.begin(), x.end(), x.begin(), 0.0) / static_cast<double>(x.size());
}
}  // namespace

TEST(GenInput, BpskIsBinary) {
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    Seq x = gen_input(InputSpec::binary(), 5000, seed);
    for (double v : x) EXPECT_TRUE(v == 1.0 || v == -1.0);
    EXPECT_NEAR(power(x), 1.0, 0.0);
  }
}

TEST(GenInput, Ar1ZeroIsWhite) {
  Seq x = gen_input(InputSpec::ar1(0.0), 100000, 3);
  EXPECT_NEAR(lag1(x), 0.0, 0.01);
  EXPECT_NEAR(power(x), 1.0, 0.02);
}

TEST(GenInput, Ar1Autocorrelation) {
  Seq x = gen_input(InputSpec::ar1(0.95), 100000, 5);
  EXPECT_NEAR(lag1(x), 0.95, 0.02);
}

TEST(GenInput, UnitPowerAr) {
  Seq x = gen_input(InputSpec::ar1(0.9, true), 200000, 8);
  EXPECT_NEAR(power(x), 1.0, 0.05);
  EXPECT_NEAR(ar_variance({0.9}), 1.0 / (1.0 - 0.81), 1e-9);
}

TEST(GenInput, RejectsUnstable) {
  EXPECT_THROW(gen_input(InputSpec::ar1(1.0), 10, 1), std::invalid_argument);
  EXPECT_THROW(gen_input(InputSpec::ar({1.5, 0.0}, 1), 10, 1), std::invalid_argument);
  EXPECT_THROW(gen_input(InputSpec::white(), 0, 1), std::invalid_argument);
}

TEST(GenInput, SeedDeterminism) {
  for (auto spec : {InputSpec::white(), InputSpec::binary(), InputSpec::ar1(0.7), InputSpec::ar({0.5, -0.2}, 1)}) {
    EXPECT_EQ(gen_input(spec, 1000, 42), gen_input(spec, 1000, 42));
    EXPECT_NE(gen_input(spec, 1000, 42), gen_input(spec, 1000, 43));
  }
}

TEST(Rng, SplitStreamsDiffer) {
  Rng r = Rng::for_trial(7, 3);
  Rng a = r.split(1), b = r.split(2);
  EXPECT_NE(a.normal(), b.normal());
  EXPECT_EQ(Rng::for_trial(7, 3).split(1).normal(), Rng::for_trial(7, 3).split(1).normal());
}

TEST(SystemPreset, Values) {
  Vec ch5 = load_system_preset("ch5_channel").w_o;
  ASSERT_EQ(ch5.size(), 8);
  const double want[] = {1, 2, 3, 4, 4, 3, 2, 1};
  for (int i = 0; i < 8; ++i) EXPECT_EQ(ch5(i), want[i]);
  Vec l = load_system_preset("ch7_lowpass_0.4").w_o;
  ASSERT_EQ(l.size(), 40);
  for (int i = 0; i < 40; ++i) EXPECT_EQ(l(i), 0.4);
  Vec w6 = load_system_preset("ch6_wo").w_o;
  EXPECT_EQ(w6(0), 0.24);
  EXPECT_EQ(w6(4), 0.5);
  EXPECT_THROW(load_system_preset("nope"), std::invalid_argument);
}

TEST(SystemPreset, Ch7Block) {
  Vec w = load_system_preset("ch7_block_low").w_o;
  ASSERT_EQ(w.size(), 40);
  EXPECT_EQ(w(9), 0.0);
  EXPECT_NEAR(w(12), 0.15, 1e-15);
  EXPECT_EQ(w(20), 0.3);
  EXPECT_NEAR(w(27), 0.15, 1e-15);
  EXPECT_EQ(w(30), 0.0);
  Vec h = load_system_preset("ch7_block_high").w_o;
  for (int i = 0; i < 40; ++i) EXPECT_EQ(h(i), (i % 2 ? 1.0 : -1.0) * w(i));
}

TEST(SystemPreset, RandomGaussianByName) {
  auto a = load_system_preset("random_gaussian(9,4)");
  EXPECT_EQ(a.size(), 10u);
  EXPECT_EQ(a.w_o, random_gaussian_system(9, 4).w_o);
}

TEST(SystemFile, Load) {
  const std::string path = testing::TempDir() + "sys.txt";
  {
    std::ofstream f(path);
    f << "# comment\n0.5\n-0.25 # trailing\n\n1e-3\n";
  }
  Vec w = load_system_file(path).w_o;
  ASSERT_EQ(w.size(), 3);
  EXPECT_EQ(w(1), -0.25);
  std::remove(path.c_str());
  EXPECT_THROW(load_system_file("/nonexistent/x"), std::runtime_error);
}

TEST(SynthDesired, Noiseless) {
  SystemModel sys = random_gaussian_system(4, 1);
  Seq x = gen_input(InputSpec::white(), 200, 2);
  Rng rng(3);
  Desired dn = synth_desired(sys, x, 0.0, rng);
  for (long k = 0; k < 200; ++k) {
    Vec xk = tap_vector(x, k, 4);
    double y = 0.0;
    for (int i = 0; i <= 4; ++i) y += sys.w_o(i) * xk(i);
    EXPECT_EQ(dn.d[k], y);
    EXPECT_EQ(dn.n[k], 0.0);
  }
}

TEST(SynthDesired, ImpulseSystem) {
  SystemModel sys{Vec::Unit(3, 0), "e0"};
  Seq x = gen_input(InputSpec::white(), 100, 2);
  Rng rng(3);
  Desired dn = synth_desired(sys, x, 0.01, rng);
  for (std::size_t k = 0; k < 100; ++k) EXPECT_DOUBLE_EQ(dn.d[k], x[k] + dn.n[k]);
}

TEST(SynthDesired, Snr20dB) {
  Vec w = Vec::Ones(10) / std::sqrt(10.0);
  SystemModel sys{w, "unit"};
  Seq x = gen_input(InputSpec::binary(), 200000, 4);
  Rng rng(5);
  Desired dn = synth_desired(sys, x, 0.01, rng);
  double ps = 0, pn = 0;
  for (std::size_t k = 10; k < x.size(); ++k) {
    ps += std::pow(dn.d[k] - dn.n[k], 2);
    pn += dn.n[k] * dn.n[k];
  }
  EXPECT_NEAR(10 * std::log10(ps / pn), 20.0, 0.1);
}

TEST(SynthDesired, BoundedNoise) {
  SystemModel sys = random_gaussian_system(2, 1);
  Seq x = gen_input(InputSpec::white(), 5000, 2);
  Rng rng(3);
  Desired dn = synth_desired_bounded(sys, x, 0.11, rng);
  double mx = 0;
  for (double n : dn.n) mx = std::max(mx, std::abs(n));
  EXPECT_LE(mx, 0.11);
  EXPECT_GT(mx, 0.10);
}

TEST(Window, ZeroPadding) {
  Seq x = {3.0, 4.0, 5.0};
  Seq d = {1.0, 2.0, 3.0};
  auto w = window_at(x, d, 0, 2, 0);
  ASSERT_EQ(w.X.cols(), 1);
  EXPECT_EQ(w.X.col(0), Vec::Unit(3, 0) * 3.0);
  EXPECT_EQ(w.d(0), 1.0);
}

TEST(Window, IndexArithmetic) {
  Seq x = gen_input(InputSpec::white(), 300, 9);
  Seq d = gen_input(InputSpec::white(), 300, 10);
  for (long k : {0L, 1L, 5L, 57L, 299L}) {
    auto w = window_at(x, d, k, 6, 3);
    for (int i = 0; i <= 6; ++i)
      for (int j = 0; j <= 3; ++j) {
        const long idx = k - j - i;
        EXPECT_EQ(w.X(i, j), idx >= 0 ? x[idx] : 0.0);
      }
    for (int j = 0; j <= 3; ++j) {
      EXPECT_EQ(w.d(j), k - j >= 0 ? d[k - j] : 0.0);
      // shift property
      EXPECT_EQ(w.X.col(j), window_at(x, d, k - j, 6, 3).X.col(0));
    }
  }
}
