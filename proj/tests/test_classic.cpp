#include <gtest/gtest.h>

#include <smf/classic.hpp>

using namespace smf;

namespace {
Vec v1(double a) { return Vec::Constant(1, a); }

RegressorWindow random_window(int N, int L, Rng& rng) {
  RegressorWindow w;
  w.X = Mat(N + 1, L + 1);
  w.d = Vec(L + 1);
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= L; ++j) w.X(i, j) = rng.normal();
  for (int j = 0; j <= L; ++j) w.d(j) = rng.normal();
  w.N = N;
  w.L = L;
  return w;
}
}  // namespace

TEST(Lms, ZeroErrorLeavesWeights) {
  FilterState s(Vec::Constant(3, 0.5));
  Vec x = Vec::Ones(3);
  const double e = lms_step(s, x, 1.5, 0.1);
  EXPECT_EQ(e, 0.0);
  EXPECT_EQ(s.w, Vec::Constant(3, 0.5));
}

TEST(Lms, ScalarHandEvaluation) {
  FilterState s(v1(0.0));
  const double e = lms_step(s, v1(1.0), 1.0, 0.25);
  EXPECT_EQ(e, 1.0);
  EXPECT_EQ(s.w(0), 0.5);
}

TEST(Nlms, ZeroInputLeavesWeights) {
  FilterState s(Vec::Constant(2, 0.3));
  nlms_step(s, Vec::Zero(2), 1.0, 1.0, 1e-3);
  EXPECT_EQ(s.w, Vec::Constant(2, 0.3));
}

TEST(Nlms, UnitStepZeroesPosterioriError) {
  Rng rng(1);
  FilterState s(Vec::Zero(5));
  for (int k = 0; k < 50; ++k) {
    Vec x(5);
    for (int i = 0; i < 5; ++i) x(i) = rng.normal();
    const double d = rng.normal();
    nlms_step(s, x, d, 1.0, 0.0);
    EXPECT_NEAR(d - s.w.dot(x), 0.0, 1e-12);
  }
}

TEST(Nlms, ScalarHandEvaluation) {
  FilterState s(v1(0.0));
  nlms_step(s, v1(2.0), 1.0, 1.0, 0.0);
  EXPECT_EQ(s.w(0), 0.5);
}

TEST(Ap, ZeroStepLeavesWeights) {
  Rng rng(2);
  auto win = random_window(4, 2, rng);
  FilterState s(Vec::Constant(5, 0.1));
  ap_step(s, win, 0.0);
  EXPECT_EQ(s.w, Vec::Constant(5, 0.1));
}

TEST(Ap, UnitStepInterpolatesWindow) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    auto win = random_window(7, 3, rng);
    FilterState s(Vec::Zero(8));
    for (int i = 0; i < 8; ++i) s.w(i) = rng.normal();
    Vec e = ap_step(s, win, 1.0, 0.0);
    EXPECT_EQ(e.size(), 4);
    EXPECT_LE((win.d - win.X.transpose() * s.w).norm(), 1e-10 * std::max(1.0, win.d.norm()));
  }
}

TEST(Ap, MinimumDisturbance) {
  // w' - w lies in the column space of X
  Rng rng(4);
  auto win = random_window(6, 2, rng);
  FilterState s(Vec::Zero(7));
  Vec w0 = s.w;
  ap_step(s, win, 0.7, 0.0);
  Vec dw = s.w - w0;
  Vec coef = win.X.colPivHouseholderQr().solve(dw);
  EXPECT_LE((win.X * coef - dw).norm(), 1e-12);
}

TEST(Rls, FirstStepMatchesDirectInverse) {
  Rng rng(5);
  const double delta = 0.5, lambda = 0.98;
  for (int N : {1, 2}) {
    FilterState s = rls_init(N, delta);
    Vec x(N + 1);
    for (int i = 0; i <= N; ++i) x(i) = rng.normal();
    rls_step(s, x, 0.7, lambda);
    // S_D(0) = (lambda / delta I + x x^T)^-1 from S_D(-1) = delta I
    Mat R = (lambda / delta) * Mat::Identity(N + 1, N + 1) + x * x.transpose();
    EXPECT_LE((s.S_D - R.inverse()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Rls, ZeroInputScalesInverse) {
  FilterState s = rls_init(2, 1.0);
  Mat before = s.S_D;
  rls_step(s, Vec::Zero(3), 0.0, 0.9);
  EXPECT_LE((s.S_D - before / 0.9).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(s.w, Vec::Zero(3));
}

TEST(Rls, ConvergesToLeastSquares) {
  Rng rng(6);
  const int N = 3, K = 50;
  FilterState s = rls_init(N, 1e6);
  Mat A(K, N + 1);
  Vec b(K);
  for (int k = 0; k < K; ++k) {
    Vec x(N + 1);
    for (int i = 0; i <= N; ++i) x(i) = rng.normal();
    const double d = x.sum() + 0.1 * rng.normal();
    rls_step(s, x, d, 1.0);
    A.row(k) = x.transpose();
    b(k) = d;
  }
  Vec ls = (A.transpose() * A).ldlt().solve(A.transpose() * b);
  EXPECT_LE((s.w - ls).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Rls, InverseCorrelationProperty) {
  Rng rng(7);
  const int N = 4;
  const double delta = 2.0, lambda = 0.99;
  FilterState s = rls_init(N, delta);
  Mat R = (1.0 / delta) * Mat::Identity(N + 1, N + 1);
  for (int k = 0; k < 100; ++k) {
    Vec x(N + 1);
    for (int i = 0; i <= N; ++i) x(i) = rng.normal();
    rls_step(s, x, rng.normal(), lambda);
    R = lambda * R + x * x.transpose();
  }
  EXPECT_LE((s.S_D * R - Mat::Identity(N + 1, N + 1)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(RegularizedSolve, FlagsSingularSystem) {
  bool flagged = false;
  Mat A = Mat::Ones(2, 2);
  Vec y = regularized_solve(A, Vec::Ones(2), 0.0, &flagged);
  EXPECT_TRUE(flagged);
  EXPECT_TRUE(y.allFinite());
  flagged = false;
  regularized_solve(Mat::Identity(2, 2), Vec::Ones(2), 0.0, &flagged);
  EXPECT_FALSE(flagged);
}

TEST(Classic, SizeMismatchThrows) {
  FilterState s(Vec::Zero(3));
  EXPECT_THROW(lms_step(s, Vec::Zero(2), 0.0, 0.1), std::invalid_argument);
}
