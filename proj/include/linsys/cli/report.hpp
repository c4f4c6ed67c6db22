#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "linsys/analysis.hpp"
#include "linsys/engine.hpp"
#include "linsys/theory.hpp"

namespace linsys::cli {

inline constexpr const char* kCsvHeader =
    "run_id,time,log_mass,log_normalized_mass,rho_star,overlap,integrated_overlap,active_sites,survived";

/// 17 significant digits; non-finite values as inf, -inf, nan.
std::string format_real(double x);
double parse_real(const std::string& s);

void write_csv_header(std::ostream& os);
/// One line per sample row. survived is 1 while the configuration is nonempty.
void write_csv_rows(std::ostream& os, std::uint64_t run_id, const TrajectoryRecord& rec);

struct CsvRow {
  std::uint64_t run_id = 0;
  Observables obs;
  bool survived = false;
};
/// Reads a CSV produced by write_csv_*; throws std::runtime_error on a malformed line.
std::vector<CsvRow> read_csv(std::istream& is);

struct Quantiles {
  double q05 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q95 = 0.0;
};

/// Linear interpolation between order statistics (type 7). -inf entries sort
/// first; an interpolant touching -inf is -inf.
double quantile(std::vector<double> values, double q);
Quantiles quantiles(std::span<const double> values);

struct SummaryRow {
  double time = 0.0;
  /// Runs that reached this sample (event-capped runs stop early).
  std::size_t runs = 0;
  double mean_normalized_mass = 0.0;
  double se_normalized_mass = 0.0;
  std::size_t survivors = 0;
  double survival_fraction = 0.0;
  /// Mean of int_0^t R ds over runs alive at t.
  std::optional<double> mean_integrated_overlap_survivors;
  /// Same, over runs alive at the last sample time.
  std::optional<double> mean_integrated_overlap_horizon_survivors;
  /// (1/t) ln of the normalized mass; absent at t = 0.
  std::optional<Quantiles> growth_rate;
  std::optional<Quantiles> survivor_growth_rate;
};

struct EnsembleSummary {
  std::uint64_t master_seed = 0;
  std::size_t runs = 0;
  std::size_t horizon_survivors = 0;
  std::size_t event_capped = 0;
  std::vector<SummaryRow> rows;
};

/// Aggregates in run-index order over the rows of each record.
EnsembleSummary summarize(std::span<const TrajectoryRecord> records, std::span<const double> sample_times,
                          std::uint64_t master_seed);

nlohmann::json to_json(const EnsembleSummary& s);
nlohmann::json to_json(const PhaseReport& r);
nlohmann::json to_json(const DriftAudit& a);

/// One-line description of a phase report.
std::string describe(const PhaseReport& r);

/// gnuplot script plotting the normalized mass and the overlap integral from csv_path.
std::string gnuplot_script(const std::string& csv_path);

/// Writes through a temporary file renamed into place; nothing is left at
/// path (or at the temporary) on failure.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace linsys::cli
