#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "linsys/kernel.hpp"
#include "linsys/lattice_field.hpp"
#include "linsys/rng.hpp"

namespace linsys {

/// State of the process in normalized form: the spatial distribution rho and
/// ln|eta|.
///
/// Internally rho_x = w_x / W for positive weights w with running total W,
/// and ln|eta| = log_scale + ln W. An event then touches only the sites the
/// atom reaches, instead of dividing every entry by the mass ratio. Totals are
/// recomputed from scratch every O(active) events, and the weights are
/// rescaled when W leaves [2^-200, 2^200].
class Configuration {
 public:
  /// The single particle at the origin: rho = delta_0, ln|eta| = 0.
  explicit Configuration(int d);

  /// A configuration with the given density (normalized on entry).
  static Configuration from_density(const MassField& rho, double log_mass = 0.0, double time = 0.0);

  int dim() const { return dim_; }
  double time() const { return time_; }
  bool extinct() const { return extinct_; }
  /// ln|eta_t|; -infinity once extinct.
  double log_mass() const;
  std::size_t active_sites() const { return sites_.size(); }
  const Site& active_site(std::size_t i) const { return sites_[i]; }

  double rho_at(const Site& x) const;
  MassField rho() const;
  /// sum_x rho_x, recomputed from the weights.
  double density_total() const;
  /// R = sum_x rho_x^2 from the running sums (O(1)).
  double tracked_overlap() const;

  /// True if any entry was removed by the optional prune threshold.
  bool pruned() const { return pruned_; }

  friend struct ConfigurationAccess;

 private:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  std::size_t find(const Site& x) const;
  /// Adds delta to the weight at x (inserting x if absent); returns its index.
  std::size_t add_weight(const Site& x, double delta);
  void set_weight(std::size_t i, double value);
  void remove_at(std::size_t i);
  void refresh();
  void maybe_refresh(double sumsq_before);
  void mark_extinct();

  int dim_;
  std::vector<Site> sites_;
  std::vector<double> weights_;
  std::unordered_map<Site, std::size_t, SiteHash> index_;
  double total_ = 0.0;
  double sumsq_ = 0.0;
  double log_scale_ = 0.0;
  double time_ = 0.0;
  bool extinct_ = false;
  bool pruned_ = false;
  std::size_t ops_since_refresh_ = 0;
};

struct EventRecord {
  double time = 0.0;
  Site site;
  std::size_t atom_index = 0;
  /// 1 + (|xi| - 1) rho_z for the primal process; |eta_t| / |eta_t-| in general.
  double mass_ratio = 1.0;
};

struct Observables {
  double time = 0.0;
  double rho_star = 0.0;
  double overlap = 0.0;
  std::size_t active_sites = 0;
  double log_mass = 0.0;
  /// log_mass - (|k| - 1) time = ln of the normalized mass martingale.
  double log_normalized_mass = 0.0;
  /// int_0^t R_s ds, accumulated exactly between events.
  double integrated_overlap = 0.0;
};

enum class StopReason { extinction, time_limit, event_limit };

struct FinalState {
  double time = 0.0;
  double log_mass = 0.0;
  std::size_t active_sites = 0;
  bool extinct = false;
};

struct TrajectoryRecord {
  std::vector<Observables> rows;
  FinalState final;
  bool survived = false;
  std::uint64_t seed = 0;
  StopReason stop = StopReason::time_limit;
  std::uint64_t events = 0;
  bool pruned = false;
};

struct Horizon {
  double t_max = 0.0;
  std::uint64_t max_events = std::numeric_limits<std::uint64_t>::max();
};

enum class Dynamics { primal, dual };

struct RunOptions {
  Dynamics dynamics = Dynamics::primal;
  /// Entries with rho below this are dropped (changes the law; off by default).
  std::optional<double> prune_threshold;
  /// Called at each sample time with the configuration in force.
  std::function<void(const Configuration&, const Observables&)> on_sample;
};

Configuration init_config(int d);

/// Applies the update of atom `atom_index` at site z. An update at a site
/// with zero mass is the identity.
EventRecord apply_update(Configuration& config, const Site& z, std::size_t atom_index,
                         const KernelDistribution& dist);

/// One event of the primal process: exponential holding time with rate equal
/// to the number of active sites, uniform active site, atom drawn from dist.
EventRecord step(Configuration& config, const KernelDistribution& dist, RandomStream& rng);

/// rho*, R and the normalized mass; extinct configurations give zeros.
Observables observables(const Configuration& config, double k_norm, double integrated_overlap = 0.0);

/// Dual (transposed) dynamics: at site z, zeta_z <- sum_y xi_{y-z} zeta_y.
/// Updates at empty sites are not identities, so the event set is every site
/// within l1 distance r_K of an occupied site.
class DualConfiguration {
 public:
  DualConfiguration(int d, int halo_radius);
  static DualConfiguration from_density(const MassField& zeta, int halo_radius, double log_mass = 0.0);

  const Configuration& state() const { return state_; }
  std::size_t event_sites() const { return halo_.size(); }
  const Site& event_site(std::size_t i) const { return halo_[i]; }
  bool in_event_set(const Site& x) const { return halo_index_.count(x) != 0; }

  friend struct ConfigurationAccess;

 private:
  void cover(const Site& y, int delta);

  Configuration state_;
  std::vector<Site> ball_;
  std::vector<Site> halo_;
  std::unordered_map<Site, std::size_t, SiteHash> halo_index_;
  std::unordered_map<Site, int, SiteHash> cover_count_;
};

EventRecord apply_dual_update(DualConfiguration& config, const Site& z, std::size_t atom_index,
                              const KernelDistribution& dist);
EventRecord apply_dual_step(DualConfiguration& config, const KernelDistribution& dist, RandomStream& rng);

/// Simulates from the single particle at the origin up to the horizon,
/// emitting observables at each sample time (sorted, within [0, t_max]).
TrajectoryRecord run(const KernelDistribution& dist, const Horizon& horizon,
                     std::span<const double> sample_times, std::uint64_t seed,
                     const RunOptions& options = {});

}  // namespace linsys
