// Acceptance criteria 1-12. One PASS/FAIL line per criterion; exit status 1 if any fails.
// Optional arguments restrict the run to the listed criterion numbers.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "comove/diagnostics.hpp"
#include "comove/digest.hpp"
#include "comove/granger.hpp"
#include "comove/regression.hpp"
#include "comove/rng.hpp"
#include "comove/synthetic.hpp"
#include "comove/var.hpp"

using namespace comove;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Eigen::MatrixXd random_matrix(Rng& rng, int k, double scale) {
  Eigen::MatrixXd m(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m(i, j) = scale * (2 * rng.uniform() - 1);
  return m;
}

Eigen::MatrixXd random_covariance(Rng& rng, int k) {
  const Eigen::MatrixXd b = random_matrix(rng, k, 1.0);
  return b * b.transpose() + 0.2 * Eigen::MatrixXd::Identity(k, k);
}

// Draws coefficient sets until the companion matrix is stable.
std::vector<Eigen::MatrixXd> random_stable_coefficients(Rng& rng, int k, int p) {
  for (;;) {
    std::vector<Eigen::MatrixXd> coef;
    for (int l = 0; l < p; ++l) coef.push_back(random_matrix(rng, k, 0.8 / p));
    if (is_stable(var_from_parameters(Eigen::VectorXd::Zero(k), coef, Eigen::MatrixXd::Identity(k, k)))) return coef;
  }
}

Eigen::MatrixXd simulate_var(Rng& rng, const std::vector<Eigen::MatrixXd>& coef, const Eigen::MatrixXd& sigma,
                             int T) {
  const Eigen::Index k = sigma.rows();
  const int p = static_cast<int>(coef.size());
  const Eigen::MatrixXd chol = sigma.llt().matrixL();
  const int burn = 200;
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(T + burn, k);
  Eigen::VectorXd z(k);
  for (int t = 0; t < T + burn; ++t) {
    for (Eigen::Index i = 0; i < k; ++i) z(i) = rng.normal();
    Eigen::VectorXd x = chol * z;
    for (int l = 1; l <= p && t - l >= 0; ++l) x += coef[static_cast<std::size_t>(l - 1)] * y.row(t - l).transpose();
    y.row(t) = x.transpose();
  }
  return y.bottomRows(T);
}

std::vector<double> normals(Rng& rng, int n) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = rng.normal();
  return x;
}

Outcome fevd_normalization() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int k = 2 + rep % 2, p = 1 + (rep / 2) % 2;
    const auto coef = random_stable_coefficients(rng, k, p);
    const auto y = simulate_var(rng, coef, random_covariance(rng, k), 500);
    const auto fit = fit_var(y, p);
    const auto res = fevd(fit, 12, identity_ordering(k));
    for (const auto& s : res.shares) worst = std::max(worst, (s.rowwise().sum().array() - 1.0).abs().maxCoeff());
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-8 && secs < 5.0, fmt("max |row sum - 1| = %.3g (<= 1e-8), %.2f s (< 5 s)", worst, secs)};
}

Outcome fevd_oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(202);
  double worst = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const int p = 1 + rep % 2;
    const auto coef = random_stable_coefficients(rng, 2, p);
    const Eigen::MatrixXd sigma = random_covariance(rng, 2);
    const auto ordering = identity_ordering(2);
    const auto analytic = fevd(var_from_parameters(Eigen::VectorXd::Zero(2), coef, sigma), 12, ordering);
    const auto oracle = fevd_oracle(coef, sigma, 12, ordering, 1000000, 1000 + static_cast<std::uint64_t>(rep));
    for (int h = 0; h < 12; ++h)
      worst = std::max(worst, (oracle[static_cast<std::size_t>(h)] - analytic.shares[static_cast<std::size_t>(h)])
                                  .cwiseAbs()
                                  .maxCoeff());
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-3 && secs < 120.0, fmt("max |oracle - analytic| = %.3g (<= 1e-3), %.1f s (< 120 s)", worst, secs)};
}

Outcome closed_form_cross_share() {
  double worst = 0;
  for (double rho : {0.2, 0.5, 0.8}) {
    Eigen::MatrixXd sigma(2, 2);
    sigma << 1.0, rho, rho, 1.0;
    const auto fit = var_from_parameters(Eigen::VectorXd::Zero(2), {Eigen::MatrixXd::Zero(2, 2)}, sigma);
    const auto res = fevd(fit, 1, identity_ordering(2));
    worst = std::max(worst, std::abs(res.share(1, 1, 0) - rho * rho));
  }
  return {worst <= 1e-3, fmt("max |share(y <- x) - rho^2| = %.3g (<= 1e-3)", worst)};
}

Outcome irf_matches_power() {
  Rng rng(404);
  double worst = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const int k = 2 + rep % 2;
    const auto coef = random_stable_coefficients(rng, k, 1);
    const auto fit = var_from_parameters(Eigen::VectorXd::Zero(k), coef, random_covariance(rng, k));
    const auto responses = irf(fit, 12);
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(k, k);
    for (int h = 0; h <= 12; ++h) {
      worst = std::max(worst, (responses[static_cast<std::size_t>(h)] - power).cwiseAbs().maxCoeff());
      power = power * coef[0];
    }
  }
  return {worst <= 1e-12, fmt("max |irf(h) - A1^h| = %.3g (<= 1e-12)", worst)};
}

Outcome stability_classifier() {
  Eigen::MatrixXd a(2, 2);
  a << 0.36, 0.0, 0.0, 0.31;
  const auto stable = var_from_parameters(Eigen::VectorXd::Zero(2), {a}, Eigen::MatrixXd::Identity(2, 2));
  const auto unit = var_from_parameters(Eigen::VectorXd::Zero(2), {Eigen::MatrixXd::Identity(2, 2)},
                                        Eigen::MatrixXd::Identity(2, 2));
  const bool ok = is_stable(stable) && !is_stable(unit);
  return {ok, fmt("diag(0.36, 0.31): %s, moduli %.4f/%.4f; identity: %s", is_stable(stable) ? "stable" : "unstable",
                  stable.eigenvalue_moduli[0], stable.eigenvalue_moduli[1], is_stable(unit) ? "stable" : "unstable")};
}

Outcome granger_power_size() {
  Rng rng(606);
  int detected = 0;
  for (int d = 0; d < 200; ++d) {
    const auto x = normals(rng, 48), e = normals(rng, 48);
    std::vector<double> y(48);
    for (int t = 0; t < 48; ++t) y[t] = (t ? 0.8 * x[t - 1] : 0.0) + e[t];
    detected += granger_test(y, x, 10).p_value < 0.01;
  }
  int false_pos = 0;
  for (int d = 0; d < 2000; ++d) {
    const auto x = normals(rng, 48), y = normals(rng, 48);
    const auto r = granger_test(y, x, 10);
    false_pos += r.tested && r.p_value < 0.01;
  }
  const double power = detected / 200.0, size = false_pos / 2000.0;
  return {power >= 0.95 && size <= 0.03, fmt("power %.3f (>= 0.95), false-positive rate %.4f (<= 0.03)", power, size)};
}

Outcome bic_lag_recovery() {
  Rng rng(707);
  Eigen::MatrixXd a1(2, 2), a2(2, 2);
  a1 << 0.4, 0.1, 0.0, 0.3;
  a2 << 0.25, 0.0, 0.1, 0.2;
  const std::vector<Eigen::MatrixXd> coef{a1, a2};
  Eigen::MatrixXd sigma(2, 2);
  sigma << 1.0, 0.3, 0.3, 1.0;
  int hits = 0;
  for (int rep = 0; rep < 200; ++rep) hits += select_lag_bic(simulate_var(rng, coef, sigma, 2000), 12).lag_order == 2;
  const double rate = hits / 200.0;
  return {rate >= 0.90, fmt("p = 2 selected in %.3f of runs (>= 0.90)", rate)};
}

GrangerDayOutcome day_with_counts(const std::string& date, const std::vector<int>& counts) {
  GrangerDayOutcome d;
  d.date = date;
  const std::size_t n = counts.size();
  for (std::size_t i = 0; i < n; ++i) d.codes.push_back(std::string(1, static_cast<char>('A' + i)));
  d.p_values.assign(n * n, 1.0);
  d.lags.assign(n * n, 1);
  d.tested.assign(n * n, 1);
  d.significant.assign(n * n, 0);
  for (std::size_t c = 0; c < n; ++c) {
    int left = counts[c];
    for (std::size_t e = 0; e < n && left > 0; ++e)
      if (e != c) {
        d.significant[d.at(c, e)] = 1;
        d.p_values[d.at(c, e)] = 0.001;
        --left;
      }
  }
  return d;
}

Outcome tally_semantics() {
  const std::vector<GrangerDayOutcome> days{day_with_counts("2021-01-04", {2, 2, 0, 1}),
                                            day_with_counts("2021-01-05", {0, 0, 0, 0}),
                                            day_with_counts("2021-01-06", {0, 1, 3, 0})};
  const auto t = tally(days);
  const std::vector<int> bool_days{1, 1, 1, 0};
  const std::vector<long> totals{2, 3, 3, 1};
  bool ok = t.top_influencer_days == bool_days && t.total_causal_impacts == totals;
  for (std::size_t i = 0; i < totals.size(); ++i)
    ok = ok && std::abs(t.times_log[i] - std::log(static_cast<double>(totals[i]))) < 1e-12;
  return {ok, fmt("bool days %d/%d/%d/%d (1/1/1/0), totals %ld/%ld/%ld/%ld (2/3/3/1), times_log = ln(total)",
                  t.top_influencer_days[0], t.top_influencer_days[1], t.top_influencer_days[2],
                  t.top_influencer_days[3], t.total_causal_impacts[0], t.total_causal_impacts[1],
                  t.total_causal_impacts[2], t.total_causal_impacts[3])};
}

Outcome stepwise_pruning() {
  const int rows = 41, noise_cols = 150, seeds = 50;
  int structure_ok = 0, lost = 0, weak = 0;
  double screened = 0, eliminated = 0;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(900, static_cast<std::uint64_t>(s));
    Eigen::MatrixXd X(rows, noise_cols + 2);
    std::vector<std::string> names{"signal", "signal_copy"};
    for (int j = 0; j < noise_cols; ++j) names.push_back("noise_" + std::to_string(j));
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < noise_cols + 2; ++j) X(i, j) = rng.normal();
    X.col(1) = X.col(0);
    Eigen::VectorXd y(rows);
    for (int i = 0; i < rows; ++i) y(i) = 3.0 * X(i, 0) + rng.normal();
    const auto r = stepwise_prune(X, names, y, "planted");

    int copies = 0;
    bool stars = false;
    for (const auto& c : r.coefficients)
      if (c.name == "signal" || c.name == "signal_copy") {
        ++copies;
        stars = c.stars == "***";
      }
    structure_ok += copies == 1 && stars && (r.surviving.size() < 2 || r.condition_number < 100.0);
    lost += copies == 0;
    weak += copies == 1 && !stars;
    int by_p = 0, gone = 0;
    for (const auto& step : r.trace)
      if (step.column.rfind("noise_", 0) == 0) {
        ++gone;
        by_p += step.reason == PruneReason::PValue;
      }
    screened += by_p / static_cast<double>(noise_cols);
    eliminated += gone / static_cast<double>(noise_cols);
  }
  screened /= seeds;
  eliminated /= seeds;
  return {structure_ok == seeds && screened >= 0.80,
          fmt("one copy with *** and condition < 100 in %d/%d seeds (signal pruned %d, not *** %d); p-screen removed %.3f of noise columns "
              "(>= 0.80); all screens removed %.3f",
              structure_ok, seeds, lost, weak, screened, eliminated)};
}

Outcome end_to_end_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  int hits = 0;
  std::string misses;
  for (int s = 1; s <= 20; ++s) {
    SyntheticScenario sc;
    sc.seed = static_cast<std::uint64_t>(s);
    const auto r = recovery_experiment(sc);
    const bool ok = r.leader_top.at("significant001_bool") && r.leader_top.at("sum_fevd") && r.linked_validated;
    hits += ok;
    if (!ok) misses += " " + std::to_string(s);
  }
  const double rate = hits / 20.0, secs = seconds_since(t0);
  return {rate >= 0.90 && secs < 600.0,
          fmt("recovered in %.2f of seeds (>= 0.90)%s%s, %.0f s (< 600 s)", rate, misses.empty() ? "" : ", missed:",
              misses.c_str(), secs)};
}

Outcome diagnostics_sanity() {
  Rng rng(1111);
  const double dw = durbin_watson(normals(rng, 10000));
  int jb_rejects = 0;
  for (int r = 0; r < 1000; ++r) jb_rejects += jarque_bera(normals(rng, 1000)).p_value < 0.05;
  int ar_rejects = 0, rw_rejects = 0;
  for (int r = 0; r < 500; ++r) {
    std::vector<double> ar(1000), rw(1000);
    double a = 0, w = 0;
    for (int t = 0; t < 1000; ++t) {
      a = 0.5 * a + rng.normal();
      w += rng.normal();
      ar[static_cast<std::size_t>(t)] = a;
      rw[static_cast<std::size_t>(t)] = w;
    }
    ar_rejects += adf_test(ar, 12).reject_unit_root;
    rw_rejects += adf_test(rw, 12).reject_unit_root;
  }
  const double jb = jb_rejects / 1000.0, ar = ar_rejects / 500.0, rw = rw_rejects / 500.0;
  const bool ok = std::abs(dw - 2.0) <= 0.1 && std::abs(jb - 0.05) <= 0.02 && ar >= 0.99 && rw <= 0.07;
  return {ok, fmt("DW %.4f (2 +/- 0.1), JB rejection %.3f (0.05 +/- 0.02), ADF AR(0.5) %.3f (>= 0.99), "
                  "random walk %.3f (<= 0.07)",
                  dw, jb, ar, rw)};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(COMOVE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> output_digests(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = sha256_file(e.path());
  return out;
}

Outcome pipeline_determinism() {
  const fs::path root = fs::temp_directory_path() / "comove_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::FILE* f = std::fopen((root / "scenario.txt").c_str(), "w");
    std::fputs("seed = 12\nstocks = 12\ndays = 40\nexcluded_stocks = 1\n", f);
    std::fclose(f);
  }
  const std::string fixture = (root / "fixture").string();
  if (run_cli("synth --scenario " + (root / "scenario.txt").string() + " --out-dir " + fixture) != 0)
    return {false, "synth stage failed"};
  const int a = run_cli("all --input-dir " + fixture + " --workers 1 --out-dir " + (root / "run_a").string());
  const int b = run_cli("all --input-dir " + fixture + " --workers 4 --out-dir " + (root / "run_b").string());
  if (a != 0 || b != 0) return {false, fmt("all exited %d and %d", a, b)};
  const auto da = output_digests(root / "run_a"), db = output_digests(root / "run_b");
  std::size_t differing = 0;
  for (const auto& [name, digest] : da) differing += !db.contains(name) || db.at(name) != digest;
  differing += db.size() > da.size() ? db.size() - da.size() : 0;
  return {differing == 0 && !da.empty(),
          fmt("%zu output files, %zu differ between runs with 1 and 4 workers", da.size(), differing)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"fevd normalization", fevd_normalization},
      {"fevd oracle equivalence", fevd_oracle_equivalence},
      {"closed-form cross share", closed_form_cross_share},
      {"irf equals A1^h", irf_matches_power},
      {"stability classifier", stability_classifier},
      {"granger power and size", granger_power_size},
      {"bic lag recovery", bic_lag_recovery},
      {"tally semantics", tally_semantics},
      {"stepwise pruning", stepwise_pruning},
      {"end-to-end recovery", end_to_end_recovery},
      {"diagnostics sanity", diagnostics_sanity},
      {"pipeline determinism", pipeline_determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.contains(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
