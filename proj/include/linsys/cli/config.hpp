#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "linsys/engine.hpp"
#include "linsys/kernel.hpp"
#include "linsys/theory.hpp"

namespace linsys::cli {

/// Schema violation in a run configuration. pointer() is the JSON pointer of
/// the offending value ("" for the document root).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : std::runtime_error(pointer.empty() ? message : pointer + ": " + message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

/// A file could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Required by simulate and ensemble; phase and identities ignore it.
struct RunSection {
  bool present = false;
  double t_max = 0.0;
  std::uint64_t max_events = 10'000'000;
  std::vector<double> sample_times;
  std::uint64_t seed = 0;
  std::uint64_t runs = 1;
};

struct OutputSection {
  std::optional<std::string> csv_path;
  std::optional<std::string> report_path;
  std::optional<std::string> plot_path;
};

struct OptionsSection {
  std::optional<double> prune_threshold;
  unsigned workers = 1;
  Dynamics dynamics = Dynamics::primal;
};

struct RunConfig {
  nlohmann::json model;
  KernelDistribution kernel;
  RunSection run;
  OutputSection output;
  OptionsSection options;
  PhaseOptions phase;
};

/// Kernel law from the "model" object. Constructor errors (InvalidParameter,
/// AssumptionViolation) propagate unchanged.
KernelDistribution kernel_from_json(const nlohmann::json& model, const std::string& pointer = "/model");

/// Parses and validates a run configuration. Missing fields take defaults:
/// sample.dt = t_max / 50, seed 0, runs 1, workers 1, max_events 10^7.
RunConfig parse_config(const std::string& text);

/// 0, dt, 2 dt, ... up to t_max (t_max itself included when it is a multiple).
std::vector<double> sample_grid(double t_max, double dt);

std::string read_file(const std::string& path);

}  // namespace linsys::cli
