#include "comove/influence.hpp"

#include <cmath>

#include "comove/error.hpp"

namespace comove {

InfluenceReport fevd_influence(const ReturnPanel& panel, std::string_view target, const FevdConfig& config) {
  if (panel.stock_count() < 2) throw InputError("fevd_influence: panel needs at least two stocks");
  const auto ti = panel.index_of(target);
  if (!ti) throw InputError("fevd_influence: unknown stock '" + std::string(target) + "'");

  InfluenceReport r;
  r.code = std::string(target);
  const auto i = static_cast<Eigen::Index>(*ti);
  r.mean_amount = panel.amounts.row(i).mean();
  if (!(r.mean_amount > 1.0))
    throw NumericalError("fevd_influence: " + r.code + " mean trade amount " + std::to_string(r.mean_amount) +
                         " gives a non-positive log");

  const auto peer = peer_aggregate(panel, target);
  const Eigen::Index T = static_cast<Eigen::Index>(panel.slot_count());
  Eigen::MatrixXd y(T, 2);
  y.col(0) = panel.excess.row(i).transpose();
  y.col(1) = Eigen::Map<const Eigen::VectorXd>(peer.series.data(), T);

  const auto sel = select_lag_bic(y, config.p_max);
  r.bic = sel.criteria;
  r.lag_order = sel.lag_order;
  const VarFit fit = fit_var(y, sel.lag_order);
  r.eigenvalue_moduli = fit.eigenvalue_moduli;
  r.stable = is_stable(fit);

  for (int v = 0; v < 2; ++v) {
    const Eigen::VectorXd e = fit.residuals.col(v);
    r.durbin_watson[static_cast<std::size_t>(v)] = durbin_watson({e.data(), static_cast<std::size_t>(e.size())});
    r.jarque_bera[static_cast<std::size_t>(v)] = jarque_bera({e.data(), static_cast<std::size_t>(e.size())});
  }
  try {
    for (int v = 0; v < 2; ++v) {
      const Eigen::VectorXd s = y.col(v);
      r.adf[static_cast<std::size_t>(v)] = adf_test({s.data(), static_cast<std::size_t>(s.size())}, config.adf_max_lag);
    }
    r.adf_available = true;
  } catch (const NumericalError&) {
    r.adf_available = false;
  }

  const std::vector<int> ordering = config.target_first ? std::vector<int>{0, 1} : std::vector<int>{1, 0};
  r.ordering = config.target_first ? std::vector<std::string>{r.code, "peer_aggregate"}
                                   : std::vector<std::string>{"peer_aggregate", r.code};
  const auto decomposition = fevd(fit, config.horizon, ordering);
  for (int h = 1; h <= config.horizon; ++h) {
    r.shares.push_back({decomposition.share(h, 0, 0), decomposition.share(h, 0, 1), decomposition.share(h, 1, 0),
                        decomposition.share(h, 1, 1)});
    r.sum_fevd += decomposition.share(h, 1, 0);
  }
  r.influence_per_unit_trade = r.sum_fevd / std::log(r.mean_amount);
  return r;
}

}  // namespace comove
