#include "linsys/cli/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace linsys::cli {

std::vector<TrajectoryRecord> run_ensemble(const KernelDistribution& dist, const EnsembleSpec& spec) {
  std::vector<TrajectoryRecord> out(spec.runs);
  RunOptions opts;
  opts.dynamics = spec.dynamics;
  opts.prune_threshold = spec.prune_threshold;

  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= spec.runs) return;
      try {
        out[i] = run(dist, spec.horizon, spec.sample_times, derive_seed(spec.master_seed, i), opts);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };

  const auto n = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, spec.workers), spec.runs));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace linsys::cli
