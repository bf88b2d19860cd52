#include "comove/fundamentals.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "comove/csv.hpp"
#include "comove/error.hpp"

namespace comove {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::optional<bool> parse_bool(std::string_view s) {
  const auto l = lower(s);
  if (l == "yes" || l == "true") return true;
  if (l == "no" || l == "false") return false;
  return std::nullopt;
}

std::optional<double> parse_percent(std::string_view s) {
  s = csv::trim(s);
  if (s.empty() || s.back() != '%') return std::nullopt;
  double v = 0;
  if (!csv::parse_double(s.substr(0, s.size() - 1), v)) return std::nullopt;
  return v;
}

// Tercile index (0 smallest) per stock, ranked by size then code.
std::vector<int> size_terciles(const FundamentalsTable& table, const Variable& size) {
  const std::size_t n = table.stock_count();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double va = std::get<double>(size.cells[a]), vb = std::get<double>(size.cells[b]);
    if (va != vb) return va < vb;
    return table.codes[a] < table.codes[b];
  });
  std::vector<int> tercile(n);
  for (std::size_t rank = 0; rank < n; ++rank) tercile[order[rank]] = static_cast<int>(3 * rank / n);
  return tercile;
}

std::string level_text(const Cell& c) {
  if (auto b = std::get_if<bool>(&c)) return *b ? "yes" : "no";
  if (auto d = std::get_if<double>(&c)) return csv::format_double(*d);
  return std::get<std::string>(c);
}

// Mode of the non-missing cells among the selected stocks; ties resolve to the
// smallest level text.
std::optional<Cell> mode_of(const Variable& v, const std::vector<bool>& selected) {
  std::map<std::string, std::pair<std::size_t, Cell>> counts;
  for (std::size_t i = 0; i < v.cells.size(); ++i) {
    if (!selected[i] || is_missing(v.cells[i])) continue;
    auto& e = counts[level_text(v.cells[i])];
    if (e.first++ == 0) e.second = v.cells[i];
  }
  std::optional<Cell> best;
  std::size_t best_n = 0;
  for (const auto& [text, e] : counts) {
    if (e.first > best_n) {
      best_n = e.first;
      best = e.second;
    }
  }
  return best;
}

const std::map<std::string, std::map<std::string, int>>& appendix_table() {
  static const std::map<std::string, std::map<std::string, int>> kTable = [] {
    const std::map<std::string, std::map<std::string, int>> raw = {
        {"Regulatory requirements for personal mortgages", {{"32.5%", 3}, {"12.5%", 2}, {"20.0%", 0}, {"17.5%", 1}}},
        {"Total loan regulatory requirements", {{"40%", 3}, {"27.5%", 0}, {"22.5%", 1}, {"17.5%", 2}}},
        {"Decrease in Reserve Requirement Ratio Since December 2021", {{"-1%", 1}, {"-0.75%", 0}}},
        {"Reduction in Reserve Ratio Boosts Interest Spread", {{"0.03%", 2}, {"0.02%", 1}, {"0.01%", 0}}},
        {"Core Tier 1 adequacy ratio regulatory requirement",
         {{"8.50%", 4}, {"8.25%", 2}, {"8.00%", 0}, {"7.75%", 1}, {"7.50%", 3}}},
        {"Tier 1 Capital Regulatory Adequacy Ratio", {{"9.5%", 4}, {"9.25%", 2}, {"9.00%", 0}, {"8.75%", 1}, {"8.5%", 3}}},
        {"Capital adequacy ratio regulatory requirement",
         {{"11.50%", 4}, {"11.25%", 2}, {"11.00%", 0}, {"10.75%", 1}, {"10.50%", 3}}},
        {"Years when core Tier 1 adequacy ratio hit regulatory floor",
         {{"no", 0}, {"2033-2027", 3}, {"2026", 2}, {"2024", 1}}},
        {"Years when Tier 1 capital adequacy ratio hit regulatory floor",
         {{"no", 0}, {"2026", 3}, {"2024", 2}, {"after 2026", 1}}},
        {"Year When Capital Adequacy Ratio Hits Regulatory Floor", {{"no", 0}, {"afeter2025", 2}, {"2024-2025", 1}}},
        {"Total Loan Still Needs to Be Reduced Ratio bool", {{"no", 0}, {"yes", 1}}},
        {"Personal mortgage still needs to reduce ratio bool", {{"no", 0}, {"yes", 1}}},
        {"Years when core Tier 1 adequacy ratio hit regulatory floor bool", {{"no", 0}, {"yes", 1}}},
        {"Years when Tier 1 capital adequacy ratio hit regulatory floor bool", {{"no", 0}, {"yes", 1}}},
        {"Year When Capital Adequacy Ratio Hits Regulatory Floor bool", {{"no", 0}, {"yes", 1}}},
    };
    std::map<std::string, std::map<std::string, int>> keyed;
    for (const auto& [name, levels] : raw) keyed[lower(name)] = levels;
    return keyed;
  }();
  return kTable;
}

}  // namespace

const char* to_string(VariableKind kind) {
  switch (kind) {
    case VariableKind::Numeric: return "numeric";
    case VariableKind::Categorical: return "categorical";
    case VariableKind::Boolean: return "boolean";
  }
  return "?";
}

double Variable::missing_fraction() const {
  if (cells.empty()) return 0.0;
  const auto missing = std::count_if(cells.begin(), cells.end(), [](const Cell& c) { return is_missing(c); });
  return static_cast<double>(missing) / static_cast<double>(cells.size());
}

double Variable::observed_mean() const {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& c : cells) {
    if (auto d = std::get_if<double>(&c)) {
      sum += *d;
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : std::nan("");
}

const Variable* FundamentalsTable::find(const std::string& name) const {
  for (const auto& v : variables)
    if (v.name == name) return &v;
  return nullptr;
}

Variable classify_column(std::string name, const std::vector<std::string>& raw) {
  Variable v;
  v.name = std::move(name);
  bool all_bool = true, all_numeric = true, any = false;
  for (const auto& s : raw) {
    if (s.empty()) continue;
    any = true;
    double d = 0;
    if (!parse_bool(s)) all_bool = false;
    if (!csv::parse_double(s, d)) all_numeric = false;
  }
  v.kind = !any || all_numeric ? VariableKind::Numeric
           : all_bool          ? VariableKind::Boolean
                               : VariableKind::Categorical;
  v.cells.reserve(raw.size());
  for (const auto& s : raw) {
    if (s.empty()) {
      v.cells.emplace_back(std::monostate{});
    } else if (v.kind == VariableKind::Numeric) {
      double d = 0;
      csv::parse_double(s, d);
      v.cells.emplace_back(d);
    } else if (v.kind == VariableKind::Boolean) {
      v.cells.emplace_back(*parse_bool(s));
    } else {
      v.cells.emplace_back(s);
    }
  }
  return v;
}

VariableLog& PrepLog::entry(const Variable& v) {
  for (auto& e : variables)
    if (e.name == v.name) return e;
  VariableLog e;
  e.name = v.name;
  e.kind = v.kind;
  e.missing_fraction = v.missing_fraction();
  variables.push_back(std::move(e));
  return variables.back();
}

FundamentalsTable drop_sparse_variables(const FundamentalsTable& table, double threshold, PrepLog* log) {
  FundamentalsTable out;
  out.codes = table.codes;
  if (log) log->raw_variable_count = table.variables.size();
  for (const auto& v : table.variables) {
    const bool drop = v.missing_fraction() > threshold;
    if (log) log->entry(v).dropped = drop;
    if (!drop) out.variables.push_back(v);
  }
  return out;
}

FundamentalsTable impute_by_size(const FundamentalsTable& table, const std::string& size_variable, PrepLog* log) {
  const Variable* size = table.find(size_variable);
  if (!size) throw InputError("size variable '" + size_variable + "' not in fundamentals");
  if (size->kind != VariableKind::Numeric || size->missing_fraction() > 0)
    throw InputError("size variable '" + size_variable + "' must be numeric and fully observed");
  if (log) log->size_variable = size_variable;

  const std::size_t n = table.stock_count();
  const auto tercile = size_terciles(table, *size);
  FundamentalsTable out = table;
  for (auto& v : out.variables) {
    if (v.missing_fraction() == 0) continue;
    std::size_t imputed = 0, fallback = 0;
    const std::vector<bool> everyone(n, true);
    if (v.kind == VariableKind::Numeric) {
      std::array<double, 3> sum{};
      std::array<std::size_t, 3> cnt{};
      for (std::size_t i = 0; i < n; ++i) {
        if (auto d = std::get_if<double>(&v.cells[i])) {
          sum[tercile[i]] += *d;
          ++cnt[tercile[i]];
        }
      }
      const double global = v.observed_mean();
      for (std::size_t i = 0; i < n; ++i) {
        if (!is_missing(v.cells[i])) continue;
        const int g = tercile[i];
        if (cnt[g] > 0) {
          v.cells[i] = sum[g] / static_cast<double>(cnt[g]);
        } else {
          v.cells[i] = std::isnan(global) ? 0.0 : global;
          ++fallback;
        }
        ++imputed;
      }
    } else {
      std::array<std::optional<Cell>, 3> modes;
      for (int g = 0; g < 3; ++g) {
        std::vector<bool> sel(n);
        for (std::size_t i = 0; i < n; ++i) sel[i] = tercile[i] == g;
        modes[g] = mode_of(v, sel);
      }
      const auto global = mode_of(v, everyone);
      for (std::size_t i = 0; i < n; ++i) {
        if (!is_missing(v.cells[i])) continue;
        if (modes[tercile[i]]) {
          v.cells[i] = *modes[tercile[i]];
        } else {
          v.cells[i] = *global;  // at least one observed cell survives the sparse filter
          ++fallback;
        }
        ++imputed;
      }
    }
    if (log) {
      auto& e = log->entry(v);
      e.imputed_cells += imputed;
      e.fallback_cells += fallback;
    }
  }
  return out;
}

FundamentalsTable log_transform_large(const FundamentalsTable& table, double threshold, PrepLog* log) {
  FundamentalsTable out = table;
  for (auto& v : out.variables) {
    if (v.kind != VariableKind::Numeric) continue;
    double sum = 0;
    std::size_t cnt = 0;
    for (const auto& c : v.cells) {
      if (auto d = std::get_if<double>(&c)) {
        sum += std::abs(*d);
        ++cnt;
      }
    }
    const double mean_abs = cnt ? sum / static_cast<double>(cnt) : 0.0;
    const bool transform = mean_abs > threshold;
    if (log) {
      auto& e = log->entry(v);
      e.mean_abs = mean_abs;
      e.log_transformed = e.log_transformed || transform;
    }
    if (!transform) continue;
    for (auto& c : v.cells) {
      if (auto d = std::get_if<double>(&c)) *d = std::copysign(std::log1p(std::abs(*d)), *d);
    }
    v.log_transformed = true;
  }
  return out;
}

const std::map<std::string, int>* appendix_levels(const std::string& variable) {
  const auto& table = appendix_table();
  auto it = table.find(lower(csv::trim(variable)));
  return it == table.end() ? nullptr : &it->second;
}

std::optional<int> appendix_code(const std::map<std::string, int>& levels, const std::string& value) {
  const auto pct = parse_percent(value);
  const auto key = lower(csv::trim(value));
  for (const auto& [text, code] : levels) {
    if (pct) {
      if (auto p = parse_percent(text); p && std::abs(*p - *pct) < 1e-9) return code;
    } else if (lower(text) == key) {
      return code;
    }
  }
  return std::nullopt;
}

std::vector<std::string> EncodedDesignMatrix::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (const auto& c : columns) names.push_back(c.name);
  return names;
}

std::map<std::string, std::string> EncodedDesignMatrix::column_sources() const {
  std::map<std::string, std::string> out;
  for (const auto& c : columns) out[c.name] = c.source;
  return out;
}

EncodedDesignMatrix one_hot_encode(const FundamentalsTable& table, std::size_t n_stocks, const PrepConfig& config,
                                   PrepLog* log) {
  const std::size_t n = table.stock_count();
  if (n_stocks == 0) throw InputError("one_hot_encode: empty universe");
  const double support_threshold = config.support_numerator / static_cast<double>(n_stocks);

  EncodedDesignMatrix out;
  out.codes = table.codes;
  std::vector<std::vector<double>> cols;

  for (const auto& v : table.variables) {
    if (v.missing_fraction() > 0) throw InputError("one_hot_encode: variable '" + v.name + "' still has gaps");
    VariableLog* entry = log ? &log->entry(v) : nullptr;

    bool one_hot = v.kind != VariableKind::Numeric;
    if (!one_hot) {
      const auto nonzero = std::count_if(v.cells.begin(), v.cells.end(),
                                         [](const Cell& c) { return std::get<double>(c) != 0.0; });
      const double support = static_cast<double>(nonzero) / static_cast<double>(n);
      if (support < support_threshold) {
        one_hot = true;
        if (entry) entry->low_support_one_hot = true;
      }
    }

    if (!one_hot) {
      out.columns.push_back({v.name, v.name, v.log_transformed ? "log" : "none", "", -1});
      std::vector<double> col(n);
      for (std::size_t i = 0; i < n; ++i) col[i] = std::get<double>(v.cells[i]);
      cols.push_back(std::move(col));
      if (entry) entry->columns.push_back(v.name);
      continue;
    }

    // Level text -> code.
    std::map<std::string, int> codes;
    std::vector<std::string> cell_level(n);
    for (std::size_t i = 0; i < n; ++i) cell_level[i] = level_text(v.cells[i]);
    const auto* fixed = v.kind == VariableKind::Numeric ? nullptr : appendix_levels(v.name);
    if (fixed && entry) entry->appendix_levels = true;

    if (v.kind == VariableKind::Numeric) {
      std::set<double> distinct;
      for (const auto& c : v.cells) distinct.insert(std::get<double>(c));
      int k = 0;
      for (double d : distinct) codes[csv::format_double(d)] = k++;
    } else if (v.kind == VariableKind::Boolean && !fixed) {
      for (const auto& s : cell_level) codes[s] = s == "yes" ? 1 : 0;
    } else {
      std::set<std::string> distinct(cell_level.begin(), cell_level.end());
      int next = 0;
      if (fixed) {
        for (const auto& [t, c] : *fixed) next = std::max(next, c + 1);
      }
      int k = 0;
      for (const auto& s : distinct) {
        if (fixed) {
          if (auto c = appendix_code(*fixed, s)) codes[s] = *c;
          else codes[s] = next++;
        } else {
          codes[s] = k++;
        }
      }
    }
    if (codes.size() > config.max_levels)
      throw InputError("one_hot_encode: variable '" + v.name + "' has " + std::to_string(codes.size()) +
                       " levels (limit " + std::to_string(config.max_levels) + ")");

    std::vector<std::pair<int, std::string>> by_code;
    for (const auto& [text, code] : codes) by_code.emplace_back(code, text);
    std::sort(by_code.begin(), by_code.end());
    for (const auto& [code, text] : by_code) {
      const std::string name = v.name + "_" + std::to_string(code);
      out.columns.push_back({name, v.name, "one_hot", text, code});
      std::vector<double> col(n);
      for (std::size_t i = 0; i < n; ++i) col[i] = cell_level[i] == text ? 1.0 : 0.0;
      cols.push_back(std::move(col));
      if (entry) entry->columns.push_back(name);
    }
    if (entry) entry->level_codes = codes;
  }

  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[j][i];
  return out;
}

PreparedFundamentals prepare_fundamentals(const FundamentalsTable& table, const PrepConfig& config) {
  PreparedFundamentals out;
  auto t = drop_sparse_variables(table, config.missing_threshold, &out.log);
  t = impute_by_size(t, config.size_variable, &out.log);
  t = log_transform_large(t, config.log_mean_threshold, &out.log);
  out.design = one_hot_encode(t, t.stock_count(), config, &out.log);
  out.cleaned = std::move(t);
  return out;
}

void write_design_matrix(const std::filesystem::path& path, const EncodedDesignMatrix& design,
                         const std::string& config_digest) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  if (!config_digest.empty()) out << "# config_digest=" << config_digest << '\n';
  std::vector<std::string> header{"code"};
  for (const auto& c : design.columns) header.push_back(c.name);
  csv::write_record(out, header);
  for (std::size_t i = 0; i < design.codes.size(); ++i) {
    std::vector<std::string> row{design.codes[i]};
    for (Eigen::Index j = 0; j < design.values.cols(); ++j)
      row.push_back(csv::format_double(design.values(static_cast<Eigen::Index>(i), j)));
    csv::write_record(out, row);
  }
}

std::string encoding_report_json(const PrepLog& log, const EncodedDesignMatrix& design,
                                 const std::string& config_digest) {
  nlohmann::ordered_json j;
  if (!config_digest.empty()) j["config_digest"] = config_digest;
  j["raw_variable_count"] = log.raw_variable_count;
  j["encoded_column_count"] = design.columns.size();
  j["stock_count"] = design.codes.size();
  j["size_variable"] = log.size_variable;
  auto& vars = j["variables"] = nlohmann::ordered_json::array();
  for (const auto& v : log.variables) {
    nlohmann::ordered_json e;
    e["name"] = v.name;
    e["kind"] = to_string(v.kind);
    e["missing_fraction"] = v.missing_fraction;
    e["dropped"] = v.dropped;
    e["imputed_cells"] = v.imputed_cells;
    e["fallback_cells"] = v.fallback_cells;
    e["mean_abs"] = v.mean_abs;
    e["log_transformed"] = v.log_transformed;
    e["low_support_one_hot"] = v.low_support_one_hot;
    e["appendix_levels"] = v.appendix_levels;
    e["level_codes"] = v.level_codes;
    e["columns"] = v.columns;
    vars.push_back(std::move(e));
  }
  auto& cols = j["columns"] = nlohmann::ordered_json::array();
  for (const auto& c : design.columns)
    cols.push_back({{"name", c.name}, {"source", c.source}, {"transform", c.transform}, {"level", c.level},
                    {"level_code", c.level_code}});
  return j.dump(2) + "\n";
}

EncodedDesignMatrix read_design_matrix(const std::filesystem::path& path, const std::filesystem::path& encoding_report) {
  const auto table = csv::read(path);
  EncodedDesignMatrix out;
  std::ifstream rin(encoding_report);
  if (!rin) throw InputError("cannot open " + encoding_report.string());
  const auto report = nlohmann::json::parse(rin);
  std::map<std::string, EncodedColumn> meta;
  for (const auto& c : report.at("columns")) {
    EncodedColumn col{c.at("name"), c.at("source"), c.at("transform"), c.at("level"), c.at("level_code")};
    meta[col.name] = col;
  }
  const std::size_t c_code = table.column("code");
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == c_code) continue;
    auto it = meta.find(table.header[c]);
    out.columns.push_back(it != meta.end() ? it->second
                                           : EncodedColumn{table.header[c], table.header[c], "none", "", -1});
  }
  out.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(out.columns.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    out.codes.push_back(row.fields[c_code]);
    Eigen::Index j = 0;
    for (std::size_t c = 0; c < row.fields.size(); ++c) {
      if (c == c_code) continue;
      double v = 0;
      if (!csv::parse_double(row.fields[c], v))
        throw InputError(path.string() + ":" + std::to_string(row.line) + ": non-numeric design cell");
      out.values(static_cast<Eigen::Index>(i), j++) = v;
    }
  }
  return out;
}

}  // namespace comove
