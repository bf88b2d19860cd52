#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "comove/diagnostics.hpp"
#include "comove/error.hpp"

using namespace comove;

TEST(DurbinWatson, Cases) {
  std::vector<double> flat(50, 1.0);
  EXPECT_EQ(durbin_watson(flat), 0.0);
  std::vector<double> alt;
  for (int t = 0; t < 1000; ++t) alt.push_back(t % 2 ? -1.0 : 1.0);
  EXPECT_NEAR(durbin_watson(alt), 4.0, 0.01);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> z;
  std::vector<double> e(10000);
  for (auto& v : e) v = z(gen);
  const double dw = durbin_watson(e);
  EXPECT_NEAR(dw, 2.0, 0.1);
  std::vector<double> zero(10, 0.0);
  EXPECT_THROW(durbin_watson(zero), NumericalError);
}

TEST(DurbinWatson, AlwaysInRange) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 200; ++rep) {
    const double rho = -0.99 + 1.98 * (rep / 199.0);
    std::vector<double> e(100);
    double prev = 0;
    for (auto& v : e) v = prev = rho * prev + z(gen);
    const double dw = durbin_watson(e);
    EXPECT_GE(dw, 0.0);
    EXPECT_LE(dw, 4.0);
  }
}

TEST(JarqueBera, GaussianMomentsGiveZero) {
  // Symmetric two-point-plus-centre sample with kurtosis exactly 3:
  // values {-a, 0, a} with weights (1, 4, 1) have m4 / m2^2 = 3.
  std::vector<double> x;
  for (int r = 0; r < 10; ++r) {
    x.push_back(-1.0);
    x.push_back(1.0);
    for (int k = 0; k < 4; ++k) x.push_back(0.0);
  }
  const auto jb = jarque_bera(x);
  EXPECT_NEAR(jb.skewness, 0.0, 1e-15);
  EXPECT_NEAR(jb.kurtosis, 3.0, 1e-12);
  EXPECT_NEAR(jb.statistic, 0.0, 1e-10);
  EXPECT_NEAR(jb.p_value, 1.0, 1e-10);
  std::vector<double> c(20, 3.0);
  EXPECT_THROW(jarque_bera(c), NumericalError);
}

TEST(JarqueBera, HeavyTailsRejected) {
  std::mt19937_64 gen(3);
  std::student_t_distribution<double> t3(3);
  int rejected = 0;
  const int trials = 200;
  for (int r = 0; r < trials; ++r) {
    std::vector<double> x(1000);
    for (auto& v : x) v = t3(gen);
    rejected += jarque_bera(x).p_value < 0.01;
  }
  EXPECT_GE(rejected, static_cast<int>(0.99 * trials));
}

TEST(Adf, CriticalValues) {
  // Asymptotic constants of the constant-only case.
  EXPECT_NEAR(adf_critical_value(5, 1000000000), -2.86154, 1e-4);
  EXPECT_NEAR(adf_critical_value(1, 1000000000), -3.43035, 1e-4);
  EXPECT_LT(adf_critical_value(5, 100), adf_critical_value(5, 1000));
  EXPECT_THROW(adf_critical_value(2, 100), InputError);
}

TEST(Adf, StationaryVersusRandomWalk) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> z;
  int stationary_rejects = 0, walk_rejects = 0;
  const int trials = 50;
  for (int r = 0; r < trials; ++r) {
    std::vector<double> ar(1000), rw(1000);
    double a = 0, w = 0;
    for (int t = 0; t < 1000; ++t) {
      ar[t] = a = 0.5 * a + z(gen);
      rw[t] = w = w + z(gen);
    }
    stationary_rejects += adf_test(ar, 12).reject_unit_root;
    walk_rejects += adf_test(rw, 12).reject_unit_root;
  }
  EXPECT_EQ(stationary_rejects, trials);
  EXPECT_LE(walk_rejects, 8);
}

TEST(Adf, DegenerateInputs) {
  std::vector<double> c(100, 1.0), ramp(100), shortie(10, 0.0);
  for (int t = 0; t < 100; ++t) ramp[t] = 0.5 * t;
  EXPECT_THROW(adf_test(c, 4), NumericalError);
  EXPECT_THROW(adf_test(ramp, 4), NumericalError);
  EXPECT_THROW(adf_test(shortie, 4), InputError);
}
