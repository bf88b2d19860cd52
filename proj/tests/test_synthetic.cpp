#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "comove/error.hpp"
#include "comove/granger.hpp"
#include "comove/ols.hpp"
#include "comove/returns.hpp"
#include "comove/synthetic.hpp"
#include "comove/var.hpp"
#include "fixtures.hpp"

using namespace comove;

namespace {

SyntheticScenario small(std::uint64_t seed) {
  SyntheticScenario s;
  s.seed = seed;
  s.stocks = 6;
  s.days = 20;
  return s;
}

}  // namespace

TEST(Synthetic, SameSeedSamePanel) {
  const auto a = generate_panel(small(5)), b = generate_panel(small(5)), c = generate_panel(small(6));
  const auto da = fixtures::scratch("synth_a"), db = fixtures::scratch("synth_b"), dc = fixtures::scratch("synth_c");
  write_synthetic(da, a);
  write_synthetic(db, b);
  write_synthetic(dc, c);
  for (const char* f : {"bars.csv", "factors.csv", "fundamentals.csv", "calendar.csv", "truth.json"})
    EXPECT_EQ(fixtures::read_text(da / f), fixtures::read_text(db / f)) << f;
  EXPECT_NE(fixtures::read_text(da / "bars.csv"), fixtures::read_text(dc / "bars.csv"));
}

TEST(Synthetic, WrittenFilesLoadBack) {
  auto s = small(7);
  s.excluded_stocks = 1;
  s.days = 30;
  const auto data = generate_panel(s);
  const auto dir = fixtures::scratch("synth_load");
  write_synthetic(dir, data);
  const auto cal = load_calendar(dir / "calendar.csv");
  EXPECT_EQ(cal, data.bars.calendar);
  auto bars = load_bars(dir / "bars.csv", cal);
  const auto panel = make_panel(cal, bars, load_factors(dir / "factors.csv", cal), s.benchmark_code);
  EXPECT_EQ(panel.stocks.size(), 7u);
  const auto built = build_return_panel(panel);
  EXPECT_EQ(built.excluded, data.truth.excluded);
  EXPECT_EQ(load_fundamentals(dir / "fundamentals.csv").variables.size(), data.fundamentals.variables.size());
}

TEST(Synthetic, ZeroCrossCoefficientsPlantNothing) {
  auto s = small(8);
  s.leader_coefficient = 0.0;
  const auto data = generate_panel(s);
  const auto& a = data.truth.coefficients;
  EXPECT_EQ((a - Eigen::MatrixXd(a.diagonal().asDiagonal())).norm(), 0.0);
}

TEST(Synthetic, FollowerSlopeOnLaggedLeader) {
  auto s = small(9);
  s.days = 60;
  const auto data = generate_panel(s);
  const auto built = build_return_panel(data.bars);
  const auto& p = built.panel;
  const auto leader = *p.index_of(data.truth.leaders[0]);
  for (std::size_t f = 0; f < p.stock_count(); ++f) {
    if (f == leader) continue;
    const Eigen::Index T = static_cast<Eigen::Index>(p.slot_count());
    Eigen::MatrixXd X(T - 2, 2);
    X.col(0).setOnes();
    X.col(1) = p.excess.row(static_cast<Eigen::Index>(leader)).segment(1, T - 2).transpose();
    const Eigen::VectorXd y = p.excess.row(static_cast<Eigen::Index>(f)).segment(2, T - 2).transpose();
    EXPECT_NEAR(ols(X, y).coefficients(1), 0.6, 0.05) << p.codes[f];
  }
}

TEST(Synthetic, UnstableGeneratorRejected) {
  auto s = small(1);
  s.own_ar = 1.0;
  EXPECT_THROW(generate_panel(s), InputError);
  s.own_ar = 0.0;
  s.leaders = 6;
  EXPECT_THROW(generate_panel(s), InputError);
}

TEST(Synthetic, ScenarioFile) {
  const auto dir = fixtures::scratch("scenario");
  fixtures::write_text(dir / "s.txt", "# fixture\nseed = 11\nstocks = 5\ndays = 4\nleader_coefficient = 0.5\n");
  const auto s = load_scenario(dir / "s.txt");
  EXPECT_EQ(s.seed, 11u);
  EXPECT_EQ(s.stocks, 5);
  EXPECT_EQ(s.leader_coefficient, 0.5);
  fixtures::write_text(dir / "bad.txt", "colour = blue\n");
  EXPECT_THROW(load_scenario(dir / "bad.txt"), InputError);
}

TEST(Synthetic, TwoEqualLeadersShareTieDays) {
  auto s = small(12);
  s.stocks = 8;
  s.leaders = 2;
  s.leader_coefficient = 0.45;
  const auto data = generate_panel(s);
  const auto built = build_return_panel(data.bars);
  std::vector<GrangerDayOutcome> days;
  for (std::size_t d = 0; d < built.panel.calendar.day_count(); ++d) days.push_back(daily_matrix(built.panel, d));
  const auto t = tally(days);
  const std::size_t a = t.index_of(data.truth.leaders[0]), b = t.index_of(data.truth.leaders[1]);
  int ties = 0;
  for (const auto& d : days) {
    const auto c = d.cause_counts();
    const int top = *std::max_element(c.begin(), c.end());
    ties += top > 0 && c[a] == top && c[b] == top;
  }
  EXPECT_GT(ties, 0);
  EXPECT_GE(t.top_influencer_days[a], ties);
  EXPECT_GE(t.top_influencer_days[b], ties);
}

TEST(FevdOracle, DiagonalSystemOwnShareOne) {
  Eigen::MatrixXd a(2, 2), sigma(2, 2);
  a << 0.5, 0.0, 0.0, 0.2;
  sigma << 1.0, 0.0, 0.0, 3.0;
  const std::vector<Eigen::MatrixXd> coef{a};
  const std::vector<int> ordering{0, 1};
  const auto shares = fevd_oracle(coef, sigma, 12, ordering, 100000, 3);
  for (const auto& s : shares) {
    EXPECT_NEAR(s(0, 0), 1.0, 1e-3);
    EXPECT_NEAR(s(1, 1), 1.0, 1e-3);
  }
}

TEST(FevdOracle, ClosedFormAndNormalization) {
  for (double rho : {0.2, 0.5, 0.8}) {
    Eigen::MatrixXd sigma(2, 2);
    sigma << 1.0, rho, rho, 1.0;
    const std::vector<Eigen::MatrixXd> coef{Eigen::MatrixXd::Zero(2, 2)};
    const std::vector<int> ordering{0, 1};
    const auto shares = fevd_oracle(coef, sigma, 1, ordering, 100000, 4);
    EXPECT_NEAR(shares[0](1, 0), rho * rho, 1e-3);
    for (Eigen::Index j = 0; j < 2; ++j) EXPECT_NEAR(shares[0].row(j).sum(), 1.0, 2e-3);
  }
}

TEST(FevdOracle, AgreesWithAnalyticVarTwo) {
  Eigen::MatrixXd a1(2, 2), a2(2, 2), sigma(2, 2);
  a1 << 0.3, 0.2, -0.1, 0.4;
  a2 << 0.1, 0.0, 0.05, -0.2;
  sigma << 1.0, 0.3, 0.3, 0.5;
  const std::vector<Eigen::MatrixXd> coef{a1, a2};
  for (auto ordering : {std::vector<int>{0, 1}, std::vector<int>{1, 0}}) {
    const auto oracle = fevd_oracle(coef, sigma, 12, ordering, 100000, 5);
    const auto analytic = fevd(var_from_parameters(Eigen::VectorXd::Zero(2), coef, sigma), 12, ordering);
    for (int h = 1; h <= 12; ++h) EXPECT_LT((oracle[h - 1] - analytic.shares[h - 1]).cwiseAbs().maxCoeff(), 1e-3);
  }
}
