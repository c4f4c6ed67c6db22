#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "linsys/engine.hpp"
#include "linsys/kernel.hpp"

namespace linsys::cli {

struct EnsembleSpec {
  Horizon horizon;
  std::vector<double> sample_times;
  std::uint64_t master_seed = 0;
  std::uint64_t runs = 1;
  unsigned workers = 1;
  Dynamics dynamics = Dynamics::primal;
  std::optional<double> prune_threshold;
};

/// Runs every trajectory with seed derive_seed(master_seed, index) on a pool
/// of workers. Records are returned in index order, so the result does not
/// depend on the number of workers. The first exception from any run stops
/// the pool and is rethrown.
std::vector<TrajectoryRecord> run_ensemble(const KernelDistribution& dist, const EnsembleSpec& spec);

}  // namespace linsys::cli
