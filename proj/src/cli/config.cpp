#include "linsys/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "linsys/errors.hpp"

namespace linsys::cli {

using nlohmann::json;

namespace {

std::string child(const std::string& p, const std::string& key) { return p + "/" + key; }
std::string child(const std::string& p, std::size_t i) { return p + "/" + std::to_string(i); }

const json& require(const json& obj, const std::string& key, const std::string& p) {
  if (!obj.contains(key)) throw ConfigError(child(p, key), "required field missing");
  return obj.at(key);
}

void expect_object(const json& v, const std::string& p) {
  if (!v.is_object()) throw ConfigError(p, "expected an object");
}

void expect_array(const json& v, const std::string& p) {
  if (!v.is_array()) throw ConfigError(p, "expected an array");
}

double as_real(const json& v, const std::string& p) {
  if (!v.is_number()) throw ConfigError(p, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(p, "expected a finite number");
  return x;
}

std::int64_t as_int(const json& v, const std::string& p) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::floor(x) == x && std::abs(x) < 9e15) return static_cast<std::int64_t>(x);
  }
  throw ConfigError(p, "expected an integer");
}

std::uint64_t as_uint(const json& v, const std::string& p) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const std::int64_t x = as_int(v, p);
  if (x < 0) throw ConfigError(p, "expected a nonnegative integer");
  return static_cast<std::uint64_t>(x);
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& p) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(child(p, key), "unknown field");
  }
}

Site parse_site(const json& v, const std::string& p, std::optional<int>& d) {
  expect_array(v, p);
  if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim))
    throw ConfigError(p, "a site needs between 1 and " + std::to_string(kMaxDim) + " coordinates");
  if (d && static_cast<int>(v.size()) != *d)
    throw ConfigError(p, "site has " + std::to_string(v.size()) + " coordinates, expected " + std::to_string(*d));
  d = static_cast<int>(v.size());
  std::vector<int> c;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::int64_t x = as_int(v[i], child(p, i));
    if (std::abs(x) > 1'000'000) throw ConfigError(child(p, i), "coordinate out of range");
    c.push_back(static_cast<int>(x));
  }
  return Site(c);
}

/// [[site, value], ...] -> field.
MassField parse_entries(const json& v, const std::string& p, std::optional<int>& d) {
  expect_array(v, p);
  std::vector<std::pair<Site, double>> entries;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string pi = child(p, i);
    if (!v[i].is_array() || v[i].size() != 2) throw ConfigError(pi, "expected [site, value]");
    const Site x = parse_site(v[i][0], child(pi, 0), d);
    entries.emplace_back(x, as_real(v[i][1], child(pi, 1)));
  }
  if (!d) throw ConfigError(p, "cannot infer the dimension from an empty list");
  MassField f(*d);
  for (const auto& [x, val] : entries) f.add(x, val);
  return f;
}

std::optional<int> parse_dim(const json& model, const std::string& p) {
  if (!model.contains("d")) return std::nullopt;
  const std::int64_t d = as_int(model.at("d"), child(p, "d"));
  if (d < 1 || d > kMaxDim) throw ConfigError(child(p, "d"), "d must be in [1, " + std::to_string(kMaxDim) + "]");
  return static_cast<int>(d);
}

}  // namespace

KernelDistribution kernel_from_json(const json& model, const std::string& p) {
  expect_object(model, p);
  const json& type = require(model, "type", p);
  if (!type.is_string()) throw ConfigError(child(p, "type"), "expected a string");
  const std::string t = type.get<std::string>();

  if (t == "bcpp") {
    reject_unknown(model, {"type", "d", "lambda"}, p);
    const std::optional<int> d = parse_dim(model, p);
    if (!d) throw ConfigError(child(p, "d"), "required field missing");
    return make_bcpp(*d, as_real(require(model, "lambda", p), child(p, "lambda")));
  }
  if (t == "potlatch") {
    reject_unknown(model, {"type", "d", "k", "w_atoms"}, p);
    std::optional<int> d = parse_dim(model, p);
    const MassField k = parse_entries(require(model, "k", p), child(p, "k"), d);
    const json& w = require(model, "w_atoms", p);
    const std::string pw = child(p, "w_atoms");
    expect_array(w, pw);
    std::vector<WeightAtom> atoms;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const std::string pi = child(pw, i);
      if (!w[i].is_array() || w[i].size() != 2) throw ConfigError(pi, "expected [prob, value]");
      atoms.push_back(WeightAtom{as_real(w[i][0], child(pi, 0)), as_real(w[i][1], child(pi, 1))});
    }
    return make_potlatch(k, atoms);
  }
  if (t == "custom") {
    reject_unknown(model, {"type", "d", "atoms"}, p);
    std::optional<int> d = parse_dim(model, p);
    const json& a = require(model, "atoms", p);
    const std::string pa = child(p, "atoms");
    expect_array(a, pa);
    if (a.empty()) throw ConfigError(pa, "at least one atom is required");
    std::vector<KernelAtom> atoms;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string pi = child(pa, i);
      expect_object(a[i], pi);
      reject_unknown(a[i], {"prob", "vector"}, pi);
      KernelAtom atom;
      atom.prob = as_real(require(a[i], "prob", pi), child(pi, "prob"));
      const json& vec = require(a[i], "vector", pi);
      if (vec.is_array() && vec.empty()) {
        if (!d) throw ConfigError(child(pi, "vector"), "the zero vector needs an explicit d");
        atom.vector = MassField(*d);
      } else {
        atom.vector = parse_entries(vec, child(pi, "vector"), d);
      }
      atoms.push_back(std::move(atom));
    }
    return make_custom(*d, std::move(atoms));
  }
  throw ConfigError(child(p, "type"), "unknown kernel type '" + t + "' (expected bcpp, potlatch or custom)");
}

std::vector<double> sample_grid(double t_max, double dt) {
  std::vector<double> out;
  if (t_max == 0.0) return {0.0};
  const auto n = static_cast<std::uint64_t>(std::floor(t_max / dt * (1.0 + 1e-12)));
  for (std::uint64_t i = 0; i <= n; ++i) out.push_back(std::min(static_cast<double>(i) * dt, t_max));
  return out;
}

namespace {

RunSection parse_run(const json& r) {
  RunSection run;
  run.present = true;
  expect_object(r, "/run");
  reject_unknown(r, {"t_max", "max_events", "sample", "seed", "runs"}, "/run");
  run.t_max = as_real(require(r, "t_max", "/run"), "/run/t_max");
  if (run.t_max < 0.0) throw ConfigError("/run/t_max", "t_max must be nonnegative");
  if (r.contains("max_events")) run.max_events = as_uint(r.at("max_events"), "/run/max_events");
  if (r.contains("seed")) run.seed = as_uint(r.at("seed"), "/run/seed");
  if (r.contains("runs")) run.runs = as_uint(r.at("runs"), "/run/runs");
  if (run.runs < 1) throw ConfigError("/run/runs", "runs must be at least 1");

  if (r.contains("sample")) {
    const json& s = r.at("sample");
    expect_object(s, "/run/sample");
    reject_unknown(s, {"times", "dt"}, "/run/sample");
    if (s.contains("times") == s.contains("dt"))
      throw ConfigError("/run/sample", "give exactly one of 'times' and 'dt'");
    if (s.contains("times")) {
      const json& ts = s.at("times");
      expect_array(ts, "/run/sample/times");
      if (ts.empty()) throw ConfigError("/run/sample/times", "at least one sample time is required");
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const std::string pi = child("/run/sample/times", i);
        const double t = as_real(ts[i], pi);
        if (t < 0.0 || t > run.t_max) throw ConfigError(pi, "sample time outside [0, t_max]");
        if (!run.sample_times.empty() && t < run.sample_times.back())
          throw ConfigError(pi, "sample times must be nondecreasing");
        run.sample_times.push_back(t);
      }
    } else {
      const double dt = as_real(s.at("dt"), "/run/sample/dt");
      if (!(dt > 0.0)) throw ConfigError("/run/sample/dt", "dt must be positive");
      run.sample_times = sample_grid(run.t_max, dt);
    }
  } else {
    run.sample_times = sample_grid(run.t_max, run.t_max / 50.0);
  }
  return run;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  expect_object(doc, "");
  reject_unknown(doc, {"model", "run", "output", "options", "phase"}, "");

  const json& model = require(doc, "model", "");
  KernelDistribution kernel = kernel_from_json(model, "/model");

  RunSection run;
  if (doc.contains("run")) run = parse_run(doc.at("run"));

  OutputSection output;
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    expect_object(o, "/output");
    reject_unknown(o, {"csv_path", "report_path", "plot_path"}, "/output");
    auto path = [&](const char* key) -> std::optional<std::string> {
      if (!o.contains(key)) return std::nullopt;
      if (!o.at(key).is_string() || o.at(key).get<std::string>().empty())
        throw ConfigError(child("/output", key), "expected a nonempty path string");
      return o.at(key).get<std::string>();
    };
    output.csv_path = path("csv_path");
    output.report_path = path("report_path");
    output.plot_path = path("plot_path");
  }

  OptionsSection options;
  if (doc.contains("options")) {
    const json& o = doc.at("options");
    expect_object(o, "/options");
    reject_unknown(o, {"prune_threshold", "workers", "dynamics"}, "/options");
    if (o.contains("prune_threshold") && !o.at("prune_threshold").is_null()) {
      const double thr = as_real(o.at("prune_threshold"), "/options/prune_threshold");
      if (!(thr > 0.0) || thr >= 1.0) throw ConfigError("/options/prune_threshold", "must be in (0, 1)");
      options.prune_threshold = thr;
    }
    if (o.contains("workers")) {
      const std::uint64_t w = as_uint(o.at("workers"), "/options/workers");
      if (w < 1 || w > 1024) throw ConfigError("/options/workers", "workers must be in [1, 1024]");
      options.workers = static_cast<unsigned>(w);
    }
    if (o.contains("dynamics")) {
      const json& dyn = o.at("dynamics");
      if (dyn == "primal") options.dynamics = Dynamics::primal;
      else if (dyn == "dual") options.dynamics = Dynamics::dual;
      else throw ConfigError("/options/dynamics", "expected 'primal' or 'dual'");
    }
  }

  PhaseOptions phase;
  if (doc.contains("phase")) {
    const json& ph = doc.at("phase");
    expect_object(ph, "/phase");
    reject_unknown(ph, {"margin", "window_radius", "eval_radius", "n_max", "search_witness", "method"}, "/phase");
    if (ph.contains("margin")) {
      phase.margin = as_real(ph.at("margin"), "/phase/margin");
      if (phase.margin < 0.0) throw ConfigError("/phase/margin", "margin must be nonnegative");
    }
    auto radius = [&](const char* key, int& out) {
      if (!ph.contains(key)) return;
      const std::int64_t v = as_int(ph.at(key), child("/phase", key));
      if (v < 0 || v > 64) throw ConfigError(child("/phase", key), "radius must be in [0, 64]");
      out = static_cast<int>(v);
    };
    radius("window_radius", phase.window_radius);
    radius("eval_radius", phase.eval_radius);
    if (phase.eval_radius < phase.window_radius)
      throw ConfigError("/phase/eval_radius", "eval_radius must be at least window_radius");
    if (ph.contains("n_max")) {
      const std::int64_t n = as_int(ph.at("n_max"), "/phase/n_max");
      if (n < 0 || n > 1'000'000) throw ConfigError("/phase/n_max", "n_max must be in [0, 10^6]");
      phase.n_max = static_cast<int>(n);
    }
    if (ph.contains("search_witness")) {
      if (!ph.at("search_witness").is_boolean()) throw ConfigError("/phase/search_witness", "expected a boolean");
      phase.search_witness = ph.at("search_witness").get<bool>();
    }
    if (ph.contains("method")) {
      const json& m = ph.at("method");
      if (m == "fourier") phase.method = GreenMethod::fourier;
      else if (m == "series") phase.method = GreenMethod::series;
      else throw ConfigError("/phase/method", "expected 'fourier' or 'series'");
    }
  }

  return RunConfig{model, std::move(kernel), std::move(run), std::move(output), options, phase};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return ss.str();
}

}  // namespace linsys::cli
