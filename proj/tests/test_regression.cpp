#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "comove/error.hpp"
#include "comove/regression.hpp"

using namespace comove;

namespace {

Eigen::MatrixXd gaussian(std::mt19937_64& gen, int rows, int cols) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = z(gen);
  return m;
}

std::vector<std::string> names_for(int cols) {
  std::vector<std::string> n;
  for (int j = 0; j < cols; ++j) n.push_back("x" + std::to_string(j));
  return n;
}

}  // namespace

TEST(ConditionNumber, OrthonormalDesignIsOne) {
  Eigen::MatrixXd q(4, 2);
  q << 1, 1, -1, 1, 1, -1, -1, -1;
  const auto r = condition_number(standardize_columns(q));
  EXPECT_NEAR(r.condition_number, 1.0, 1e-12);
}

TEST(ConditionNumber, DuplicateAndNearDependency) {
  std::mt19937_64 gen(1);
  Eigen::MatrixXd x = gaussian(gen, 30, 3);
  x.col(2) = x.col(0);
  const auto dup = condition_number(standardize_columns(x));
  EXPECT_GT(dup.condition_number, 1e8);
  ASSERT_TRUE(dup.worst_column);
  EXPECT_TRUE(*dup.worst_column == 0 || *dup.worst_column == 2);

  Eigen::MatrixXd y = gaussian(gen, 30, 3);
  y.col(2) = y.col(0) + y.col(1) + 0.01 * gaussian(gen, 30, 1);
  const auto before = condition_number(standardize_columns(y));
  ASSERT_TRUE(before.worst_column);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < 3; ++j)
    if (j != static_cast<Eigen::Index>(*before.worst_column)) keep.push_back(j);
  Eigen::MatrixXd reduced(30, 2);
  reduced << y.col(keep[0]), y.col(keep[1]);
  EXPECT_LT(condition_number(standardize_columns(reduced)).condition_number, before.condition_number);
}

TEST(ConditionNumber, ZeroVarianceRejected) {
  Eigen::MatrixXd x(5, 2);
  x << 1, 2, 1, 3, 1, 4, 1, 5, 1, 6;
  EXPECT_THROW(standardize_columns(x), InputError);
}

TEST(Stepwise, StrongSignalOnOrthogonalDesign) {
  std::mt19937_64 gen(2);
  Eigen::MatrixXd x = gaussian(gen, 60, 3);
  Eigen::VectorXd y = 3 * x.col(0) + 0.01 * gaussian(gen, 60, 1);
  y += x.col(1) + x.col(2);
  const auto r = stepwise_prune(x, names_for(3), y, "m");
  EXPECT_TRUE(r.trace.empty());
  const auto* c = r.find("x0");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->stars, "***");
  EXPECT_EQ(r.coefficients.front().name, "const");
}

TEST(Stepwise, DuplicatePairLeavesOneSurvivor) {
  std::mt19937_64 gen(3);
  Eigen::MatrixXd x = gaussian(gen, 41, 5);
  x.col(4) = x.col(1);
  Eigen::VectorXd y = 2 * x.col(1) + 3 * x.col(0) + gaussian(gen, 41, 1);
  const auto r = stepwise_prune(x, names_for(5), y);
  const bool a = r.find("x1"), b = r.find("x4");
  EXPECT_TRUE(a != b);
  EXPECT_LT(r.condition_number, 100.0);
}

TEST(Stepwise, NoiseIsMostlyRemovedAndInvariantsHold) {
  std::mt19937_64 gen(4);
  const int cols = 20;
  Eigen::MatrixXd x = gaussian(gen, 41, cols);
  Eigen::VectorXd y = gaussian(gen, 41, 1);
  const auto names = names_for(cols);
  const auto r = stepwise_prune(x, names, y);
  EXPECT_LE(r.surviving.size(), 12u);
  if (r.surviving.size() >= 2) EXPECT_LT(r.condition_number, 100.0);
  for (const auto& c : r.coefficients)
    if (c.name != "const") EXPECT_LE(c.p_value, 0.5);

  // Trace and survivors partition the input columns.
  std::multiset<std::string> seen(r.surviving.begin(), r.surviving.end());
  for (const auto& s : r.trace) seen.insert(s.column);
  EXPECT_EQ(seen, std::multiset<std::string>(names.begin(), names.end()));

  // Fixpoint: re-running on the survivors removes nothing.
  Eigen::MatrixXd kept(41, static_cast<Eigen::Index>(r.surviving.size()));
  for (std::size_t j = 0; j < r.surviving.size(); ++j)
    kept.col(static_cast<Eigen::Index>(j)) =
        x.col(std::find(names.begin(), names.end(), r.surviving[j]) - names.begin());
  const auto again = stepwise_prune(kept, r.surviving, y);
  EXPECT_TRUE(again.trace.empty());
  EXPECT_EQ(again.surviving, r.surviving);
}

TEST(Stepwise, MoreColumnsThanRowsAndZeroVariance) {
  std::mt19937_64 gen(5);
  Eigen::MatrixXd x = gaussian(gen, 12, 30);
  x.col(7).setConstant(2.0);
  Eigen::VectorXd y = x.col(0) * 5 + 0.1 * gaussian(gen, 12, 1);
  const auto r = stepwise_prune(x, names_for(30), y);
  EXPECT_LT(r.surviving.size(), 11u);
  EXPECT_EQ(r.trace.front().reason, PruneReason::ZeroVariance);
  EXPECT_EQ(r.trace.front().column, "x7");
  EXPECT_THROW(stepwise_prune(x.topRows(5), names_for(30), y.head(5)), InputError);
}

TEST(Stepwise, AllEliminatedGivesInterceptOnly) {
  Eigen::MatrixXd x(10, 1);
  x << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10;
  Eigen::VectorXd y(10);
  y << 1, -1, 1, -1, 1, -1, 1, -1, 1, -1.0;
  y.array() += 0.01 * x.array().sin();
  const auto r = stepwise_prune(x, {"x"}, y);
  if (r.surviving.empty()) {
    EXPECT_EQ(r.coefficients.size(), 1u);
    EXPECT_FALSE(r.warnings.empty());
  }
}

TEST(Stars, Thresholds) {
  EXPECT_EQ(significance_stars(0.009), "***");
  EXPECT_EQ(significance_stars(0.01), "**");
  EXPECT_EQ(significance_stars(0.049), "**");
  EXPECT_EQ(significance_stars(0.05), "*");
  EXPECT_EQ(significance_stars(0.099), "*");
  EXPECT_EQ(significance_stars(0.1), "");
}

TEST(Vif, Cases) {
  Eigen::MatrixXd q(4, 2);
  q << 1, 1, -1, 1, 1, -1, -1, -1;
  for (double v : vif_report(q)) EXPECT_NEAR(v, 1.0, 1e-12);
  std::mt19937_64 gen(6);
  Eigen::MatrixXd x = gaussian(gen, 50, 2);
  x.col(1) = x.col(0) + 0.01 * gaussian(gen, 50, 1);
  for (double v : vif_report(x)) EXPECT_GT(v, 10.0);
  x.col(1) = 2 * x.col(0);
  for (double v : vif_report(x)) EXPECT_TRUE(std::isinf(v));
  EXPECT_THROW(vif_report(x.leftCols(1)), InputError);
}

namespace {

StepwiseResult result_with(const std::string& model, std::vector<std::pair<std::string, double>> cols) {
  StepwiseResult r;
  r.model = model;
  r.coefficients.push_back({"const", 0, 1, 0.5, ""});
  for (const auto& [name, p] : cols) {
    r.coefficients.push_back({name, p < 0.05 ? -1.0 : 1.0, 1, p, significance_stars(p)});
    r.surviving.push_back(name);
  }
  return r;
}

}  // namespace

TEST(CrossValidate, Rules) {
  const std::map<std::string, std::string> sources{{"a", "a"}, {"b_1", "b"}, {"b_0", "b"}, {"c", "c"}, {"d", "d"}};
  std::vector<StepwiseResult> results{
      result_with("significant001_bool", {{"a", 0.01}, {"b_1", 0.2}, {"c", 0.05}, {"d", 0.09}}),
      result_with("significant001_times_log", {{"a", 0.02}, {"b_0", 0.3}, {"c", 0.5}, {"d", 0.01}}),
      result_with("sum_fevd", {{"c", 0.4}, {"d", 0.02}}),
      result_with("influence_per_unit_trade", {{"d", 0.07}, {"b_0", 0.09}}),
  };
  const auto report = cross_validate(results, sources);
  EXPECT_FALSE(report.partial);
  std::map<std::string, ValidationEntry> by;
  for (const auto& e : report.entries) by[e.variable] = e;
  EXPECT_TRUE(by.at("a").validated);
  EXPECT_EQ(by.at("a").models.size(), 2u);
  EXPECT_FALSE(by.at("b").validated);
  EXPECT_FALSE(by.at("c").validated);
  EXPECT_TRUE(by.at("d").validated);
  EXPECT_EQ(by.at("d").models.size(), 4u);
  EXPECT_FALSE(by.at("d").sign_consistent);

  // Order of the supplied results does not matter.
  std::reverse(results.begin(), results.end());
  const auto again = cross_validate(results, sources);
  ASSERT_EQ(again.entries.size(), report.entries.size());
  for (std::size_t i = 0; i < again.entries.size(); ++i) {
    EXPECT_EQ(again.entries[i].variable, report.entries[i].variable);
    EXPECT_EQ(again.entries[i].models, report.entries[i].models);
    EXPECT_EQ(again.entries[i].validated, report.entries[i].validated);
  }
  results.pop_back();
  EXPECT_TRUE(cross_validate(results, sources).partial);
}
