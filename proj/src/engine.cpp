#include "linsys/engine.hpp"

#include <algorithm>
#include <cmath>

#include "linsys/errors.hpp"

namespace linsys {

namespace {

constexpr double kRescaleHigh = 0x1.0p200;
constexpr double kRescaleLow = 0x1.0p-200;
constexpr std::size_t kMinRefreshInterval = 64;

}  // namespace

/// Mutation interface shared by the primal and dual updates and the run loop.
struct ConfigurationAccess {
  static constexpr std::size_t npos = Configuration::npos;
  static Configuration& state(DualConfiguration& d) { return d.state_; }
  static void set_time(Configuration& c, double t) { c.time_ = t; }
  static std::size_t find(const Configuration& c, const Site& x) { return c.find(x); }
  static double weight(const Configuration& c, std::size_t i) { return c.weights_[i]; }
  static double total(const Configuration& c) { return c.total_; }
  static std::size_t add_weight(Configuration& c, const Site& x, double delta) {
    return c.add_weight(x, delta);
  }
  static void set_weight(Configuration& c, std::size_t i, double v) { c.set_weight(i, v); }
  static void finish_update(Configuration& c, double sumsq_before, double total_before) {
    if (c.sites_.empty()) {
      c.mark_extinct();
      return;
    }
    if (c.total_ < 0.5 * total_before) {
      c.refresh();
      return;
    }
    c.maybe_refresh(sumsq_before);
  }
  static double sumsq(const Configuration& c) { return c.sumsq_; }

  static void prune(Configuration& c, const Site& x, double threshold) {
    const std::size_t i = c.find(x);
    if (i == Configuration::npos) return;
    if (c.weights_[i] < threshold * c.total_) {
      c.set_weight(i, 0.0);
      c.pruned_ = true;
      if (c.sites_.empty()) c.mark_extinct();
    }
  }
  static void cover(DualConfiguration& d, const Site& y, int delta) { d.cover(y, delta); }
  static void clear_halo(DualConfiguration& d) {
    d.halo_.clear();
    d.halo_index_.clear();
    d.cover_count_.clear();
  }
};

Configuration::Configuration(int d) : dim_(d) {
  if (d < 1 || d > kMaxDim) throw InvalidParameter("dimension out of range");
  sites_.push_back(Site(d));
  weights_.push_back(1.0);
  index_.emplace(Site(d), 0);
  total_ = 1.0;
  sumsq_ = 1.0;
}

Configuration Configuration::from_density(const MassField& rho, double log_mass, double time) {
  if (!rho.is_nonnegative()) throw InvalidParameter("density must be nonnegative");
  Configuration c(rho.dim());
  c.sites_.clear();
  c.weights_.clear();
  c.index_.clear();
  c.time_ = time;
  for (const auto& [x, v] : rho) {
    c.index_.emplace(x, c.sites_.size());
    c.sites_.push_back(x);
    c.weights_.push_back(v);
  }
  if (c.sites_.empty()) {
    c.mark_extinct();
    return c;
  }
  c.refresh();
  c.log_scale_ = log_mass - std::log(c.total_);
  return c;
}

double Configuration::log_mass() const {
  if (extinct_) return -std::numeric_limits<double>::infinity();
  return log_scale_ + std::log(total_);
}

double Configuration::rho_at(const Site& x) const {
  const std::size_t i = find(x);
  return i == npos ? 0.0 : weights_[i] / total_;
}

MassField Configuration::rho() const {
  MassField out(dim_);
  for (std::size_t i = 0; i < sites_.size(); ++i) out.set(sites_[i], weights_[i] / total_);
  return out;
}

double Configuration::density_total() const {
  if (extinct_) return 0.0;
  double s = 0.0;
  for (double w : weights_) s += w;
  return s / total_;
}

double Configuration::tracked_overlap() const {
  if (extinct_) return 0.0;
  return sumsq_ / (total_ * total_);
}

std::size_t Configuration::find(const Site& x) const {
  auto it = index_.find(x);
  return it == index_.end() ? npos : it->second;
}

std::size_t Configuration::add_weight(const Site& x, double delta) {
  std::size_t i = find(x);
  if (i == npos) {
    i = sites_.size();
    sites_.push_back(x);
    weights_.push_back(delta);
    index_.emplace(x, i);
    total_ += delta;
    sumsq_ += delta * delta;
    return i;
  }
  const double old = weights_[i];
  const double now = old + delta;
  weights_[i] = now;
  total_ += delta;
  sumsq_ += now * now - old * old;
  return i;
}

void Configuration::set_weight(std::size_t i, double value) {
  const double old = weights_[i];
  total_ += value - old;
  sumsq_ += value * value - old * old;
  if (value == 0.0) {
    remove_at(i);
    return;
  }
  weights_[i] = value;
}

void Configuration::remove_at(std::size_t i) {
  const std::size_t last = sites_.size() - 1;
  index_.erase(sites_[i]);
  if (i != last) {
    sites_[i] = sites_[last];
    weights_[i] = weights_[last];
    index_[sites_[i]] = i;
  }
  sites_.pop_back();
  weights_.pop_back();
}

void Configuration::refresh() {
  double t = 0.0;
  double s = 0.0;
  for (double w : weights_) {
    t += w;
    s += w * w;
  }
  total_ = t;
  sumsq_ = s;
  ops_since_refresh_ = 0;
  if (total_ > kRescaleHigh || total_ < kRescaleLow) {
    const double inv = 1.0 / total_;
    for (double& w : weights_) w *= inv;
    log_scale_ += std::log(total_);
    sumsq_ *= inv * inv;
    total_ = 1.0;
  }
}

void Configuration::maybe_refresh(double sumsq_before) {
  ++ops_since_refresh_;
  if (ops_since_refresh_ >= std::max(kMinRefreshInterval, sites_.size()) || sumsq_ < 0.5 * sumsq_before ||
      total_ > kRescaleHigh || total_ < kRescaleLow)
    refresh();
}

void Configuration::mark_extinct() {
  sites_.clear();
  weights_.clear();
  index_.clear();
  total_ = 0.0;
  sumsq_ = 0.0;
  extinct_ = true;
}

Configuration init_config(int d) { return Configuration(d); }

EventRecord apply_update(Configuration& config, const Site& z, std::size_t atom_index,
                         const KernelDistribution& dist) {
  using A = ConfigurationAccess;
  if (config.extinct()) throw InvalidState("cannot update an extinct configuration");
  EventRecord rec{config.time(), z, atom_index, 1.0};
  const std::size_t iz = A::find(config, z);
  if (iz == ConfigurationAccess::npos) return rec;

  const AtomOffsets& atom = dist.atom_offsets()[atom_index];
  const double wz = A::weight(config, iz);
  const double total_before = A::total(config);
  const double sumsq_before = A::sumsq(config);
  rec.mass_ratio = 1.0 + (atom.total - 1.0) * (wz / total_before);

  // Neighbours first: appends never move iz.
  for (const auto& [offset, value] : atom.others) A::add_weight(config, z + offset, value * wz);
  A::set_weight(config, iz, atom.self * wz);
  A::finish_update(config, sumsq_before, total_before);
  if (config.extinct())
    rec.mass_ratio = 0.0;
  else if (rec.mass_ratio <= 0.0)
    rec.mass_ratio = A::total(config) / total_before;
  return rec;
}

EventRecord step(Configuration& config, const KernelDistribution& dist, RandomStream& rng) {
  if (config.extinct()) throw InvalidState("cannot step an extinct configuration");
  const std::size_t n = config.active_sites();
  ConfigurationAccess::set_time(config, config.time() + rng.exponential(static_cast<double>(n)));
  const Site z = config.active_site(rng.index(n));
  const std::size_t atom = sample_atom(dist, rng);
  return apply_update(config, z, atom, dist);
}

namespace {

Observables observe(const Configuration& config, double time, double k_norm, double integrated) {
  Observables o;
  o.time = time;
  o.integrated_overlap = integrated;
  if (config.extinct()) {
    o.log_mass = -std::numeric_limits<double>::infinity();
    o.log_normalized_mass = o.log_mass;
    return o;
  }
  const MassField rho = config.rho();
  double total = 0.0;
  for (const auto& [x, v] : rho) total += v;
  double star = 0.0;
  double overlap = 0.0;
  for (const auto& [x, v] : rho) {
    const double r = v / total;
    star = std::max(star, r);
    overlap += r * r;
  }
  // Rounding can push R a few ulps past rho*; anything larger is left visible.
  const double ulps = 4.0 * std::numeric_limits<double>::epsilon();
  if (overlap > star && overlap <= star * (1.0 + ulps)) overlap = star;
  if (overlap < star * star && overlap >= star * star * (1.0 - ulps)) overlap = star * star;
  o.rho_star = star;
  o.overlap = overlap;
  o.active_sites = config.active_sites();
  o.log_mass = config.log_mass();
  o.log_normalized_mass = o.log_mass - (k_norm - 1.0) * time;
  return o;
}

}  // namespace

Observables observables(const Configuration& config, double k_norm, double integrated_overlap) {
  return observe(config, config.time(), k_norm, integrated_overlap);
}

DualConfiguration::DualConfiguration(int d, int halo_radius)
    : state_(d), ball_(l1_ball(d, halo_radius)) {
  cover(Site(d), 1);
}

DualConfiguration DualConfiguration::from_density(const MassField& zeta, int halo_radius, double log_mass) {
  DualConfiguration dc(zeta.dim(), halo_radius);
  ConfigurationAccess::clear_halo(dc);
  dc.state_ = Configuration::from_density(zeta, log_mass);
  for (std::size_t i = 0; i < dc.state_.active_sites(); ++i) dc.cover(dc.state_.active_site(i), 1);
  return dc;
}

void DualConfiguration::cover(const Site& y, int delta) {
  for (const Site& o : ball_) {
    const Site z = y + o;
    int& count = cover_count_[z];
    count += delta;
    if (delta > 0 && count == 1) {
      halo_index_.emplace(z, halo_.size());
      halo_.push_back(z);
    } else if (count == 0) {
      cover_count_.erase(z);
      auto it = halo_index_.find(z);
      const std::size_t i = it->second;
      halo_index_.erase(it);
      const std::size_t last = halo_.size() - 1;
      if (i != last) {
        halo_[i] = halo_[last];
        halo_index_[halo_[i]] = i;
      }
      halo_.pop_back();
    }
  }
}

EventRecord apply_dual_update(DualConfiguration& dc, const Site& z, std::size_t atom_index,
                              const KernelDistribution& dist) {
  using A = ConfigurationAccess;
  Configuration& config = A::state(dc);
  if (config.extinct()) throw InvalidState("cannot update an extinct configuration");
  EventRecord rec{config.time(), z, atom_index, 1.0};

  const AtomOffsets& atom = dist.atom_offsets()[atom_index];
  const std::size_t iz = A::find(config, z);
  const double old = iz == ConfigurationAccess::npos ? 0.0 : A::weight(config, iz);
  double now = atom.self * old;
  for (const auto& [offset, value] : atom.others) {
    const std::size_t iy = A::find(config, z + offset);
    if (iy != ConfigurationAccess::npos) now += value * A::weight(config, iy);
  }
  if (now == old) return rec;

  const double total_before = A::total(config);
  const double sumsq_before = A::sumsq(config);
  rec.mass_ratio = 1.0 + (now - old) / total_before;
  if (iz == ConfigurationAccess::npos) {
    A::add_weight(config, z, now);
    A::cover(dc, z, 1);
  } else {
    A::set_weight(config, iz, now);
    if (now == 0.0) A::cover(dc, z, -1);
  }
  A::finish_update(config, sumsq_before, total_before);
  if (config.extinct()) {
    A::clear_halo(dc);
    rec.mass_ratio = 0.0;
  } else if (rec.mass_ratio <= 0.0) {
    rec.mass_ratio = A::total(config) / total_before;
  }
  return rec;
}

EventRecord apply_dual_step(DualConfiguration& dc, const KernelDistribution& dist, RandomStream& rng) {
  Configuration& config = ConfigurationAccess::state(dc);
  if (config.extinct()) throw InvalidState("cannot step an extinct configuration");
  const std::size_t n = dc.event_sites();
  ConfigurationAccess::set_time(config, config.time() + rng.exponential(static_cast<double>(n)));
  const Site z = dc.event_site(rng.index(n));
  const std::size_t atom = sample_atom(dist, rng);
  return apply_dual_update(dc, z, atom, dist);
}

namespace {

struct PrimalProcess {
  Configuration config;
  const KernelDistribution& dist;

  const Configuration& state() const { return config; }
  Configuration& mutable_state() { return config; }
  std::size_t rate() const { return config.active_sites(); }
  EventRecord fire(std::size_t pick, std::size_t atom) {
    const Site z = config.active_site(pick);
    return apply_update(config, z, atom, dist);
  }
};

struct DualProcess {
  DualConfiguration config;
  const KernelDistribution& dist;

  const Configuration& state() const { return config.state(); }
  Configuration& mutable_state() { return ConfigurationAccess::state(config); }
  std::size_t rate() const { return config.event_sites(); }
  EventRecord fire(std::size_t pick, std::size_t atom) {
    const Site z = config.event_site(pick);
    return apply_dual_update(config, z, atom, dist);
  }
};

template <class Process>
TrajectoryRecord run_process(Process& process, const KernelDistribution& dist, const Horizon& horizon,
                             std::span<const double> samples, std::uint64_t seed, const RunOptions& options) {
  TrajectoryRecord rec;
  rec.seed = seed;
  RandomStream rng(seed);
  const double k_norm = dist.k_norm();

  double t = 0.0;
  double integrated = 0.0;
  std::size_t cursor = 0;
  auto emit = [&](double s) {
    const Observables o = observe(process.state(), s, k_norm, integrated);
    rec.rows.push_back(o);
    if (options.on_sample) options.on_sample(process.state(), o);
  };

  while (true) {
    const Configuration& cfg = process.state();
    if (cfg.extinct()) {
      rec.stop = StopReason::extinction;
      break;
    }
    const double overlap = cfg.tracked_overlap();
    const double t_next = t + rng.exponential(static_cast<double>(process.rate()));
    while (cursor < samples.size() && samples[cursor] < t_next) {
      integrated += overlap * (samples[cursor] - t);
      t = samples[cursor];
      emit(t);
      ++cursor;
    }
    if (t_next > horizon.t_max) {
      integrated += overlap * (horizon.t_max - t);
      t = horizon.t_max;
      ConfigurationAccess::set_time(process.mutable_state(), t);
      rec.stop = StopReason::time_limit;
      break;
    }
    if (rec.events >= horizon.max_events) {
      rec.stop = StopReason::event_limit;
      break;
    }
    integrated += overlap * (t_next - t);
    t = t_next;
    ConfigurationAccess::set_time(process.mutable_state(), t);
    const std::size_t pick = rng.index(process.rate());
    const std::size_t atom = sample_atom(dist, rng);
    const EventRecord ev = process.fire(pick, atom);
    ++rec.events;
    if (options.prune_threshold && !process.state().extinct()) {
      Configuration& c = process.mutable_state();
      ConfigurationAccess::prune(c, ev.site, *options.prune_threshold);
      for (const auto& [offset, value] : dist.atom_offsets()[atom].others)
        if (!c.extinct()) ConfigurationAccess::prune(c, ev.site + offset, *options.prune_threshold);
    }
  }

  if (rec.stop == StopReason::extinction) {
    while (cursor < samples.size()) emit(samples[cursor++]);
  }

  const Configuration& fin = process.state();
  rec.final = FinalState{fin.time(), fin.log_mass(), fin.active_sites(), fin.extinct()};
  rec.survived = !fin.extinct();
  rec.pruned = fin.pruned();
  return rec;
}

}  // namespace

TrajectoryRecord run(const KernelDistribution& dist, const Horizon& horizon,
                     std::span<const double> sample_times, std::uint64_t seed, const RunOptions& options) {
  if (!(horizon.t_max >= 0.0)) throw InvalidParameter("t_max must be nonnegative");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < 0.0 || sample_times[i] > horizon.t_max)
      throw InvalidParameter("sample times must lie in [0, t_max]");
    if (i > 0 && sample_times[i] < sample_times[i - 1]) throw InvalidParameter("sample times must be sorted");
  }
  if (options.dynamics == Dynamics::dual) {
    DualProcess p{DualConfiguration(dist.dim(), dist.r_K()), dist};
    return run_process(p, dist, horizon, sample_times, seed, options);
  }
  PrimalProcess p{Configuration(dist.dim()), dist};
  return run_process(p, dist, horizon, sample_times, seed, options);
}

}  // namespace linsys
