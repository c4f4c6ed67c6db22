#include "linsys/cli/report.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "linsys/cli/config.hpp"

namespace linsys::cli {

using nlohmann::json;

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

double parse_real(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw std::runtime_error("not a number: '" + s + "'");
  return v;
}

void write_csv_header(std::ostream& os) { os << kCsvHeader << '\n'; }

void write_csv_rows(std::ostream& os, std::uint64_t run_id, const TrajectoryRecord& rec) {
  for (const Observables& o : rec.rows) {
    os << run_id << ',' << format_real(o.time) << ',' << format_real(o.log_mass) << ','
       << format_real(o.log_normalized_mass) << ',' << format_real(o.rho_star) << ',' << format_real(o.overlap)
       << ',' << format_real(o.integrated_overlap) << ',' << o.active_sites << ','
       << (o.active_sites > 0 ? 1 : 0) << '\n';
  }
}

std::vector<CsvRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw std::runtime_error("missing or unexpected CSV header");
  std::vector<CsvRow> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 9) throw std::runtime_error("expected 9 fields: '" + line + "'");
    CsvRow r;
    r.run_id = std::stoull(f[0]);
    r.obs.time = parse_real(f[1]);
    r.obs.log_mass = parse_real(f[2]);
    r.obs.log_normalized_mass = parse_real(f[3]);
    r.obs.rho_star = parse_real(f[4]);
    r.obs.overlap = parse_real(f[5]);
    r.obs.integrated_overlap = parse_real(f[6]);
    r.obs.active_sites = std::stoull(f[7]);
    r.survived = f[8] == "1";
    out.push_back(r);
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0 || lo == hi) return values[lo];
  if (!std::isfinite(values[lo]) || !std::isfinite(values[hi])) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

Quantiles quantiles(std::span<const double> values) {
  const std::vector<double> v(values.begin(), values.end());
  return Quantiles{quantile(v, 0.05), quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75), quantile(v, 0.95)};
}

EnsembleSummary summarize(std::span<const TrajectoryRecord> records, std::span<const double> sample_times,
                          std::uint64_t master_seed) {
  EnsembleSummary s;
  s.master_seed = master_seed;
  s.runs = records.size();
  const std::size_t last = sample_times.empty() ? 0 : sample_times.size() - 1;
  std::vector<bool> horizon_alive(records.size(), false);
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rows = records[r].rows;
    if (records[r].stop == StopReason::event_limit) ++s.event_capped;
    horizon_alive[r] = !sample_times.empty() && rows.size() == sample_times.size() && rows[last].active_sites > 0;
    if (horizon_alive[r]) ++s.horizon_survivors;
  }

  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    SummaryRow row;
    row.time = sample_times[i];
    double sum = 0.0, sumsq = 0.0, ir_alive = 0.0, ir_horizon = 0.0;
    std::size_t n_horizon = 0;
    std::vector<double> rates, survivor_rates;
    for (std::size_t r = 0; r < records.size(); ++r) {
      if (records[r].rows.size() <= i) continue;
      const Observables& o = records[r].rows[i];
      ++row.runs;
      const double m = std::exp(o.log_normalized_mass);
      sum += m;
      sumsq += m * m;
      const bool alive = o.active_sites > 0;
      if (alive) {
        ++row.survivors;
        ir_alive += o.integrated_overlap;
      }
      if (horizon_alive[r]) {
        ++n_horizon;
        ir_horizon += o.integrated_overlap;
      }
      if (row.time > 0.0) {
        const double rate = o.log_normalized_mass / row.time;
        rates.push_back(rate);
        if (alive) survivor_rates.push_back(rate);
      }
    }
    if (row.runs > 0) {
      const double n = static_cast<double>(row.runs);
      row.mean_normalized_mass = sum / n;
      row.survival_fraction = static_cast<double>(row.survivors) / n;
      if (row.runs > 1) {
        const double var = std::max(0.0, (sumsq - n * row.mean_normalized_mass * row.mean_normalized_mass) / (n - 1.0));
        row.se_normalized_mass = std::sqrt(var / n);
      }
    }
    if (row.survivors > 0) row.mean_integrated_overlap_survivors = ir_alive / static_cast<double>(row.survivors);
    if (n_horizon > 0) row.mean_integrated_overlap_horizon_survivors = ir_horizon / static_cast<double>(n_horizon);
    if (!rates.empty()) row.growth_rate = quantiles(rates);
    if (!survivor_rates.empty()) row.survivor_growth_rate = quantiles(survivor_rates);
    s.rows.push_back(row);
  }
  return s;
}

namespace {

json real(double x) {
  if (std::isfinite(x)) return x;
  return format_real(x);
}

json opt_real(const std::optional<double>& x) { return x ? real(*x) : json(nullptr); }

json to_json(const Quantiles& q) {
  return json{{"q05", real(q.q05)}, {"q25", real(q.q25)}, {"q50", real(q.q50)}, {"q75", real(q.q75)},
              {"q95", real(q.q95)}};
}

json opt_quantiles(const std::optional<Quantiles>& q) { return q ? to_json(*q) : json(nullptr); }

}  // namespace

json to_json(const EnsembleSummary& s) {
  json rows = json::array();
  for (const SummaryRow& r : s.rows) {
    rows.push_back(json{{"time", real(r.time)},
                        {"runs", r.runs},
                        {"mean_normalized_mass", real(r.mean_normalized_mass)},
                        {"se_normalized_mass", real(r.se_normalized_mass)},
                        {"survivors", r.survivors},
                        {"survival_fraction", real(r.survival_fraction)},
                        {"mean_integrated_overlap_survivors", opt_real(r.mean_integrated_overlap_survivors)},
                        {"mean_integrated_overlap_horizon_survivors",
                         opt_real(r.mean_integrated_overlap_horizon_survivors)},
                        {"growth_rate_quantiles", opt_quantiles(r.growth_rate)},
                        {"survivor_growth_rate_quantiles", opt_quantiles(r.survivor_growth_rate)}});
  }
  return json{{"master_seed", s.master_seed},
              {"runs", s.runs},
              {"horizon_survivors", s.horizon_survivors},
              {"event_capped", s.event_capped},
              {"rows", rows}};
}

json to_json(const PhaseReport& r) {
  json w{{"searched", r.witness.searched}, {"truncated", r.witness.truncated},
         {"last_value", real(r.witness.last_value)}};
  return json{{"d", r.d},
              {"k_norm", real(r.k_norm)},
              {"k0", real(r.k0)},
              {"log_moment_margin", real(r.log_moment_margin)},
              {"loc_statistic", opt_real(r.loc_statistic)},
              {"classification", to_string(r.classification)},
              {"witness_n", r.witness_n ? json(*r.witness_n) : json(nullptr)},
              {"witness_search", w},
              {"pi_d", opt_real(r.pi_d)},
              {"g0", opt_real(r.g0)}};
}

json to_json(const DriftAudit& a) {
  return json{{"c1", real(a.witness.c1)},
              {"c2", real(a.witness.c2)},
              {"configs", a.configs},
              {"violations", a.violations},
              {"large_configs", a.large_configs},
              {"min_slack", real(a.min_slack)},
              {"max_f_ratio_global", real(a.max_f_ratio_global)},
              {"max_f_ratio_local", real(a.max_f_ratio_local)}};
}

std::string describe(const PhaseReport& r) {
  std::string s = fmt::format("classification: {} (d = {}, log-moment margin {:.6g}", to_string(r.classification),
                              r.d, r.log_moment_margin);
  if (r.loc_statistic) s += fmt::format(", statistic {:.10g} against threshold 2", *r.loc_statistic);
  if (r.witness_n) s += fmt::format(", witness n = {}", *r.witness_n);
  else if (r.witness.searched > 0 || r.witness.truncated)
    s += fmt::format(", no witness up to n = {}{}", r.witness.searched, r.witness.truncated ? " (box budget hit)" : "");
  if (r.pi_d && r.d >= 3) s += fmt::format(", return probability {:.10g}", *r.pi_d);
  return s + ")";
}

std::string gnuplot_script(const std::string& csv_path) {
  std::string p;
  for (char c : csv_path) {
    if (c == '\'') p += "''";
    else p += c;
  }
  return fmt::format(
      "# columns: {}\n"
      "set datafile separator ','\n"
      "set key autotitle columnhead\n"
      "set multiplot layout 2,1\n"
      "set xlabel 'time'\n"
      "set ylabel 'log normalized mass'\n"
      "plot '{}' using 2:4 with lines notitle\n"
      "set ylabel 'integrated overlap'\n"
      "plot '{}' using 2:7 with lines notitle\n"
      "unset multiplot\n",
      kCsvHeader, p, p);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::remove(tmp.c_str());
      throw IoError("error while writing '" + path + "'");
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot move output into place at '" + path + "'");
  }
}

}  // namespace linsys::cli
