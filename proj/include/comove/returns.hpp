#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "comove/market_data.hpp"

namespace comove {

// Interval returns on factor-adjusted closes. NaN marks an interval whose own
// bar or predecessor bar is missing. The first interval of a day chains to the
// previous day's last slot; the first calendar slot has no predecessor.
std::vector<double> adjusted_return_series(const BarSeries& bars,
                                           const std::vector<std::optional<double>>& factors,
                                           int intervals_per_day);

// Elementwise stock minus benchmark. The benchmark must be complete; NaN in
// the stock series is carried through.
std::vector<double> excess_returns(std::span<const double> stock, std::span<const double> benchmark);

struct ImputationEvent {
  std::string code;
  std::size_t slot = 0;
  std::string method;  // "zero", "ratio", "previous_day", "slot_median"
};

// Excess returns and trade amounts before imputation (NaN = missing).
struct RawReturnPanel {
  TradingCalendar calendar;
  std::vector<std::string> codes;
  Eigen::MatrixXd returns;  // stocks x slots
  Eigen::MatrixXd amounts;  // stocks x slots
  std::vector<std::size_t> missing_bars;
};

using Mask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

struct ReturnPanel {
  TradingCalendar calendar;
  std::vector<std::string> codes;
  Eigen::MatrixXd excess;   // stocks x slots, finite everywhere
  Eigen::MatrixXd amounts;  // stocks x slots, finite everywhere
  Mask return_imputed;
  Mask amount_imputed;
  std::vector<ImputationEvent> audit;

  std::size_t stock_count() const { return codes.size(); }
  std::size_t slot_count() const { return static_cast<std::size_t>(excess.cols()); }
  std::optional<std::size_t> index_of(std::string_view code) const;
};

struct ImputedReturns {
  Eigen::MatrixXd values;
  Mask mask;
};

// Zero-fills every gap. Fails when a stock above the exclusion threshold is
// still present; those must be dropped first.
ImputedReturns impute_returns(const RawReturnPanel& raw, std::size_t exclusion_threshold = 1000);

struct ImputedAmounts {
  Eigen::MatrixXd values;
  Mask mask;
  std::vector<ImputationEvent> audit;
};

// Missing amount at (day d, slot k) = estimated day-d total x slot k's share of
// day d-1. The day-d total is scaled up from the observed slots using the same
// day d-1 shares. Falls back to day d-1's slot-k amount when day d has nothing
// usable, and to the cross-sectional slot median on the first calendar day.
ImputedAmounts impute_volume(const Eigen::MatrixXd& amounts, const TradingCalendar& calendar,
                             const std::vector<std::string>& codes);

struct PeerAggregate {
  std::string target;
  std::vector<double> series;
};

// Amount-weighted mean excess return of all stocks except the target;
// equal weights where every peer amount is zero.
PeerAggregate peer_aggregate(const ReturnPanel& panel, std::string_view target);
// Peer weights at one slot, ordered like panel.codes with the target at 0.
std::vector<double> peer_weights(const ReturnPanel& panel, std::size_t target, std::size_t slot);

struct ReturnBuildResult {
  ReturnPanel panel;
  std::vector<std::string> excluded;  // more missing bars than the threshold
};

ReturnBuildResult build_return_panel(const BarPanel& bars, std::size_t exclusion_threshold = 1000);

// code,timestamp,excess_return,amount,imputed_flag (bit 1: return, bit 2: amount)
void write_returns_csv(const std::filesystem::path& path, const ReturnPanel& panel, const std::string& config_digest = {});
ReturnPanel read_returns_csv(const std::filesystem::path& path, const TradingCalendar& calendar);

}  // namespace comove
