// run_config.cpp

#include "cylnls/run_config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "cylnls/errors.hpp"
#include "cylnls/io.hpp"

namespace cylnls {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError("config: " + path + ": " + msg);
}

/// A JSON object being read; remembers which keys were consumed so that
/// leftovers can be rejected.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json* raw(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* v = raw(key);
    if (!v) fail(key_path(key), "missing required key");
    return *v;
  }

  double num(const std::string& key, double def) {
    const json* v = raw(key);
    return v ? as_num(*v, key_path(key)) : def;
  }
  double req_num(const std::string& key) { return as_num(require(key), key_path(key)); }

  long long integer(const std::string& key, long long def) {
    const json* v = raw(key);
    return v ? as_int(*v, key_path(key)) : def;
  }
  long long req_integer(const std::string& key) { return as_int(require(key), key_path(key)); }

  std::size_t count(const std::string& key, std::size_t def) {
    const long long v = integer(key, static_cast<long long>(def));
    if (v < 0) fail(key_path(key), "must be >= 0");
    return static_cast<std::size_t>(v);
  }

  bool boolean(const std::string& key, bool def) {
    const json* v = raw(key);
    if (!v) return def;
    if (!v->is_boolean()) fail(key_path(key), "expected true or false");
    return v->get<bool>();
  }

  std::string str(const std::string& key, const std::string& def) {
    const json* v = raw(key);
    if (!v) return def;
    if (!v->is_string()) fail(key_path(key), "expected a string");
    return v->get<std::string>();
  }
  std::string req_str(const std::string& key) {
    const json& v = require(key);
    if (!v.is_string()) fail(key_path(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> nums(const std::string& key, const std::vector<double>& def) {
    const json* v = raw(key);
    if (!v) return def;
    return as_nums(*v, key_path(key));
  }
  std::vector<double> req_nums(const std::string& key) { return as_nums(require(key), key_path(key)); }

  std::optional<Obj> child(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    return Obj(*v, key_path(key));
  }

  /// Rejects keys that were never read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(key_path(it.key()), "unknown key");
    }
  }

  static double as_num(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "must be finite");
    return d;
  }
  static long long as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<long long>();
  }
  static std::vector<double> as_nums(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_num(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

/// Runs a library parser or validator, turning its std::invalid_argument into
/// a ConfigError at `path`.
template <class F>
auto checked(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

const char* kind_name(DataKind k) {
  switch (k) {
    case DataKind::Packet: return "packet";
    case DataKind::PlaneWave: return "plane_wave";
    case DataKind::MultiBand: return "multi_band";
    case DataKind::Snapshot: return "snapshot";
  }
  return "?";
}

const char* quartic_mode_name(QuarticMode m) { return m == QuarticMode::Exact ? "exact" : "thresholded"; }

GridBlock parse_grid(Obj o) {
  GridBlock g;
  g.lx = o.req_num("L_x");
  g.nx = static_cast<int>(o.req_integer("n_x"));
  g.ny = static_cast<int>(o.req_integer("n_y"));
  o.finish();
  if (!(g.lx > 0.0)) fail(o.key_path("L_x"), "must be positive");
  checked(o.path(), [&] { return Grid(g.lx, g.nx, g.ny); });
  return g;
}

MultiplierSpec parse_multiplier(Obj o) {
  MultiplierSpec m;
  m.s = o.num("s", m.s);
  m.n = o.num("N", m.n);
  const std::string prof = o.str("smoothing", std::string(profile_name(m.smoothing)));
  o.finish();
  m.smoothing = checked(o.key_path("smoothing"), [&] { return parse_profile(prof); });
  checked(o.path(), [&] {
    m.validate();
    return 0;
  });
  return m;
}

SolverConfig parse_solver(Obj o) {
  SolverConfig s;
  s.dt = o.num("dt", s.dt);
  s.t_end = o.num("T_end", s.t_end);
  s.dealias = o.boolean("dealias", s.dealias);
  s.dealias_fraction = o.num("dealias_fraction", s.dealias_fraction);
  s.nonlinear = o.boolean("nonlinear", s.nonlinear);
  const std::string sub = o.str("substep", substep_name(s.substep));
  s.kappa = o.num("kappa", s.kappa);
  s.step_heuristic_c = o.num("c", s.step_heuristic_c);
  s.mass_drift_limit = o.num("mass_drift_limit", s.mass_drift_limit);
  s.boundary_threshold = o.num("boundary_threshold", s.boundary_threshold);
  o.finish();
  s.substep = checked(o.key_path("substep"), [&] { return parse_substep(sub); });
  checked(o.path(), [&] {
    s.validate();
    return 0;
  });
  return s;
}

DataBlock parse_data(Obj o) {
  DataBlock d;
  const std::string kind = o.req_str("kind");
  if (kind == "packet") {
    d.kind = DataKind::Packet;
    d.amplitude = o.num("amplitude", d.amplitude);
    d.width = o.num("width", d.width);
    d.center = o.num("center", d.center);
    d.kick = o.num("kick", d.kick);
    d.eta = static_cast<int>(o.integer("eta", d.eta));
    if (!(d.width > 0.0)) fail(o.key_path("width"), "must be positive");
  } else if (kind == "plane_wave") {
    d.kind = DataKind::PlaneWave;
    d.amplitude = o.num("amplitude", d.amplitude);
    d.kx = static_cast<int>(o.integer("kx", d.kx));
    d.ky = static_cast<int>(o.integer("ky", d.ky));
  } else if (kind == "multi_band") {
    d.kind = DataKind::MultiBand;
    d.amplitude = o.num("amplitude", d.amplitude);
    d.bands = o.nums("bands", d.bands);
    d.per_band = static_cast<int>(o.integer("per_band", d.per_band));
    d.decay = o.num("decay", d.decay);
    const std::string pl = o.str("placement", "rows");
    if (pl == "rows") {
      d.placement = Placement::Rows;
    } else if (pl == "polar") {
      d.placement = Placement::Polar;
    } else {
      fail(o.key_path("placement"), "expected \"rows\" or \"polar\"");
    }
    d.eta_max = static_cast<int>(o.integer("eta_max", d.eta_max));
    if (o.has("seed")) d.seed = static_cast<std::uint64_t>(o.count("seed", 0));
    if (d.bands.empty()) fail(o.key_path("bands"), "needs at least one band");
    for (double b : d.bands) {
      if (!(b > 0.0)) fail(o.key_path("bands"), "band centers must be positive");
    }
    if (d.per_band < 1) fail(o.key_path("per_band"), "must be >= 1");
  } else if (kind == "snapshot") {
    d.kind = DataKind::Snapshot;
    d.path = o.req_str("path");
  } else {
    fail(o.key_path("kind"), "unknown data kind '" + kind + "' (packet, plane_wave, multi_band, snapshot)");
  }
  o.finish();
  return d;
}

DiagnosticsBlock parse_diagnostics(Obj o) {
  DiagnosticsBlock d;
  d.every = o.count("every", d.every);
  d.frame_every = o.count("frame_every", d.frame_every);
  if (o.has("hs_s")) d.hs_s = o.num("hs_s", 1.0);
  if (auto me = o.child("modified_energy")) {
    const std::string mode = me->str("mode", "exact");
    if (mode == "off") {
      d.modified_energy = false;
    } else if (mode == "exact") {
      d.modified_energy = true;
      d.quartic_mode = QuarticMode::Exact;
    } else if (mode == "thresholded") {
      d.modified_energy = true;
      d.quartic_mode = QuarticMode::Thresholded;
    } else {
      fail(me->key_path("mode"), "expected \"off\", \"exact\" or \"thresholded\"");
    }
    d.eps_amp = me->num("eps_amp", d.eps_amp);
    d.k_max = me->num("k_max", d.k_max);
    d.mode_cap = me->count("mode_cap", d.mode_cap);
    me->finish();
    if (d.eps_amp < 0.0) fail(me->key_path("eps_amp"), "must be >= 0");
  }
  o.finish();
  if (d.every == 0) fail(o.key_path("every"), "must be >= 1");
  if (d.hs_s && *d.hs_s < 0.0) fail(o.key_path("hs_s"), "must be >= 0");
  return d;
}

ExperimentBlock parse_experiment(Obj o, std::uint64_t run_seed) {
  ExperimentBlock b;
  SweepSpec& s = b.sweep;
  BilinearExperiment& e = s.base;
  const std::string variant = o.req_str("variant");
  e.variant = checked(o.key_path("variant"), [&] { return parse_variant(variant); });
  const std::string axis = o.req_str("axis");
  s.axis = checked(o.key_path("axis"), [&] { return parse_axis(axis); });
  s.values = o.req_nums("values");
  e.n1 = o.num("N1", e.n1);
  e.n2 = o.num("N2", e.n2);
  e.m = o.num("M", e.m);
  e.theta = o.num("theta", e.theta);
  e.ell = static_cast<int>(o.integer("ell", e.ell));
  e.t_window = o.num("T_window", e.variant == BilinearVariant::EqualBandL4 ? 1.0 : e.t_window);
  e.trials = o.count("trials", e.trials);
  e.seed = static_cast<std::uint64_t>(o.count("seed", run_seed));
  e.localize = o.num("localize", e.localize);
  e.slab = o.num("slab", e.slab);
  e.eta_window = static_cast<int>(o.integer("eta_window", e.eta_window));
  const std::string method = o.str("method", method_name(s.method));
  s.method = checked(o.key_path("method"), [&] { return parse_method(method); });
  s.compare_unrefined = o.boolean("compare_unrefined", s.compare_unrefined);
  b.lx = o.num("L_x", b.lx);
  BilinearOptions& opt = s.options;
  opt.tail_tolerance = o.num("tail_tolerance", opt.tail_tolerance);
  opt.t_initial = o.num("T_initial", opt.t_initial);
  opt.t_max = o.num("T_max", opt.t_max);
  opt.max_modes = o.count("max_modes", opt.max_modes);
  opt.max_pairs = o.count("max_pairs", opt.max_pairs);
  opt.max_groups = o.count("max_groups", opt.max_groups);
  opt.max_nodes = o.count("max_nodes", opt.max_nodes);
  o.finish();
  if (s.values.empty()) fail(o.key_path("values"), "needs at least one value");
  if (!(b.lx > 0.0)) fail(o.key_path("L_x"), "must be positive");
  if (!(opt.tail_tolerance > 0.0)) fail(o.key_path("tail_tolerance"), "must be positive");
  if (opt.t_initial < 0.0 || opt.t_max < 0.0) fail(o.path(), "T_initial and T_max must be >= 0");
  checked(o.path(), [&] {
    e.validate();
    return 0;
  });
  return b;
}

EnergyIncrementBlock parse_energy_increment(Obj o) {
  EnergyIncrementBlock b;
  b.n_values = o.nums("N_values", b.n_values);
  b.dt_check = o.boolean("dt_check", b.dt_check);
  o.finish();
  if (b.n_values.empty()) fail(o.key_path("N_values"), "needs at least one value");
  for (double n : b.n_values) {
    if (!(n > 1.0)) fail(o.key_path("N_values"), "values must exceed 1");
  }
  return b;
}

SymbolSampleBlock parse_symbol_sample(Obj o) {
  SymbolSampleBlock b;
  if (const json* r = o.raw("regimes")) {
    if (!r->is_array() || r->empty()) fail(o.key_path("regimes"), "expected a non-empty array of names");
    b.regimes.clear();
    for (std::size_t i = 0; i < r->size(); ++i) {
      const std::string path = o.key_path("regimes") + "[" + std::to_string(i) + "]";
      if (!(*r)[i].is_string()) fail(path, "expected a string");
      const std::string name = (*r)[i].get<std::string>();
      b.regimes.push_back(checked(path, [&] { return parse_regime(name); }));
    }
  }
  b.samples = o.count("samples", b.samples);
  b.radius = o.num("radius", b.radius);
  b.keep_rows = o.count("keep_rows", b.keep_rows);
  o.finish();
  if (b.samples == 0) fail(o.key_path("samples"), "must be >= 1");
  if (!(b.radius > 1.0)) fail(o.key_path("radius"), "must exceed 1");
  return b;
}

OutputBlock parse_output(Obj o) {
  OutputBlock b;
  b.dir = o.str("dir", b.dir);
  if (const json* f = o.raw("formats")) {
    if (!f->is_array()) fail(o.key_path("formats"), "expected an array of \"csv\" / \"json\"");
    b.csv = b.json = false;
    for (const auto& v : *f) {
      if (v == "csv") {
        b.csv = true;
      } else if (v == "json") {
        b.json = true;
      } else {
        fail(o.key_path("formats"), "unknown format " + v.dump());
      }
    }
  }
  b.plots = o.boolean("plots", b.plots);
  o.finish();
  if (b.dir.empty()) fail(o.key_path("dir"), "must not be empty");
  return b;
}

}  // namespace

const GridBlock& RunConfig::require_grid() const {
  if (!grid) fail("grid", "missing required key");
  return *grid;
}

const DataBlock& RunConfig::require_data() const {
  if (!data) fail("data", "missing required key");
  return *data;
}

RunConfig parse_run_config(const json& j) {
  Obj root(j, "");
  RunConfig c;
  c.seed = static_cast<std::uint64_t>(root.count("seed", c.seed));
  if (auto o = root.child("grid")) c.grid = parse_grid(*o);
  if (auto o = root.child("multiplier")) c.multiplier = parse_multiplier(*o);
  if (auto o = root.child("solver")) c.solver = parse_solver(*o);
  if (auto o = root.child("data")) c.data = parse_data(*o);
  if (auto o = root.child("diagnostics")) c.diagnostics = parse_diagnostics(*o);
  if (const json* ex = root.raw("experiments")) {
    if (!ex->is_array()) fail("experiments", "expected an array of experiment blocks");
    for (std::size_t i = 0; i < ex->size(); ++i) {
      c.experiments.push_back(parse_experiment(Obj((*ex)[i], "experiments[" + std::to_string(i) + "]"), c.seed));
    }
  }
  if (auto o = root.child("energy_increment")) c.energy_increment = parse_energy_increment(*o);
  if (auto o = root.child("symbol_sample")) c.symbol_sample = parse_symbol_sample(*o);
  if (auto o = root.child("growth")) {
    c.growth.fit_from = o->num("fit_from", c.growth.fit_from);
    o->finish();
    if (c.growth.fit_from < 0.0) fail("growth.fit_from", "must be >= 0");
  }
  if (auto o = root.child("output")) c.output = parse_output(*o);
  root.finish();
  return c;
}

RunConfig parse_run_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  return parse_run_config(j);
}

RunConfig load_run_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError("config: cannot read '" + path + "': " + e.what());
  }
  return parse_run_config_text(text);
}

json resolve(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  if (c.grid) j["grid"] = {{"L_x", c.grid->lx}, {"n_x", c.grid->nx}, {"n_y", c.grid->ny}};
  j["multiplier"] = {{"s", c.multiplier.s}, {"N", c.multiplier.n},
                     {"smoothing", std::string(profile_name(c.multiplier.smoothing))}};
  const SolverConfig& s = c.solver;
  j["solver"] = {{"dt", s.dt},
                 {"T_end", s.t_end},
                 {"dealias", s.dealias},
                 {"dealias_fraction", s.dealias_fraction},
                 {"nonlinear", s.nonlinear},
                 {"substep", substep_name(s.substep)},
                 {"kappa", s.kappa},
                 {"c", s.step_heuristic_c},
                 {"mass_drift_limit", s.mass_drift_limit},
                 {"boundary_threshold", s.boundary_threshold}};
  if (c.data) {
    const DataBlock& d = *c.data;
    json dj{{"kind", kind_name(d.kind)}};
    switch (d.kind) {
      case DataKind::Packet:
        dj.update({{"amplitude", d.amplitude}, {"width", d.width}, {"center", d.center}, {"kick", d.kick},
                   {"eta", d.eta}});
        break;
      case DataKind::PlaneWave:
        dj.update({{"amplitude", d.amplitude}, {"kx", d.kx}, {"ky", d.ky}});
        break;
      case DataKind::MultiBand:
        dj.update({{"amplitude", d.amplitude},
                   {"bands", d.bands},
                   {"per_band", d.per_band},
                   {"decay", d.decay},
                   {"placement", d.placement == Placement::Rows ? "rows" : "polar"},
                   {"eta_max", d.eta_max},
                   {"seed", d.seed.value_or(c.seed)}});
        break;
      case DataKind::Snapshot:
        dj["path"] = d.path;
        break;
    }
    j["data"] = dj;
  }
  const DiagnosticsBlock& d = c.diagnostics;
  j["diagnostics"] = {{"every", d.every},
                      {"frame_every", d.frame_every},
                      {"hs_s", d.hs_s.value_or(c.multiplier.s)},
                      {"modified_energy",
                       {{"mode", d.modified_energy ? quartic_mode_name(d.quartic_mode) : "off"},
                        {"eps_amp", d.eps_amp},
                        {"k_max", d.k_max},
                        {"mode_cap", d.mode_cap}}}};
  j["experiments"] = json::array();
  for (const auto& b : c.experiments) {
    const SweepSpec& sw = b.sweep;
    const BilinearExperiment& e = sw.base;
    const BilinearOptions& o = sw.options;
    j["experiments"].push_back({{"variant", variant_name(e.variant)},
                                {"axis", axis_name(sw.axis)},
                                {"values", sw.values},
                                {"N1", e.n1},
                                {"N2", e.n2},
                                {"M", e.m},
                                {"theta", e.theta},
                                {"ell", e.ell},
                                {"T_window", e.t_window},
                                {"trials", e.trials},
                                {"seed", e.seed},
                                {"localize", e.localize},
                                {"slab", e.slab},
                                {"eta_window", e.eta_window},
                                {"method", method_name(sw.method)},
                                {"compare_unrefined", sw.compare_unrefined},
                                {"L_x", b.lx},
                                {"tail_tolerance", o.tail_tolerance},
                                {"T_initial", o.t_initial},
                                {"T_max", o.t_max},
                                {"max_modes", o.max_modes},
                                {"max_pairs", o.max_pairs},
                                {"max_groups", o.max_groups},
                                {"max_nodes", o.max_nodes}});
  }
  j["energy_increment"] = {{"N_values", c.energy_increment.n_values}, {"dt_check", c.energy_increment.dt_check}};
  json regimes = json::array();
  for (auto r : c.symbol_sample.regimes) regimes.push_back(std::string(regime_name(r)));
  j["symbol_sample"] = {{"regimes", regimes},
                        {"samples", c.symbol_sample.samples},
                        {"radius", c.symbol_sample.radius},
                        {"keep_rows", c.symbol_sample.keep_rows}};
  j["growth"] = {{"fit_from", c.growth.fit_from}};
  json formats = json::array();
  if (c.output.csv) formats.push_back("csv");
  if (c.output.json) formats.push_back("json");
  j["output"] = {{"dir", c.output.dir}, {"formats", formats}, {"plots", c.output.plots}};
  return j;
}

Grid make_grid(const GridBlock& g) { return Grid(g.lx, g.nx, g.ny); }

SpectralField make_initial_data(const RunConfig& c) {
  const Grid g = make_grid(c.require_grid());
  const DataBlock& d = c.require_data();
  switch (d.kind) {
    case DataKind::Packet:
    case DataKind::PlaneWave: {
      PhysicalField u(g);
      const double xi = d.kind == DataKind::Packet ? d.kick : d.kx * g.dxi();
      const int eta = d.kind == DataKind::Packet ? d.eta : d.ky;
      for (int iy = 0; iy < g.ny(); ++iy) {
        for (int ix = 0; ix < g.nx(); ++ix) {
          const double x = g.x(ix);
          double env = d.amplitude;
          if (d.kind == DataKind::Packet) {
            const double r = (x - d.center) / d.width;
            env *= std::exp(-0.5 * r * r);
          }
          u.values[g.index(ix, iy)] = std::polar(env, xi * x + eta * g.y(iy));
        }
      }
      return forward_transform(u);
    }
    case DataKind::MultiBand: {
      const bool masked = c.solver.dealias && c.solver.nonlinear;
      const auto mask = dealias_mask(g, masked ? c.solver.dealias_fraction : 1.0);
      int eta_max = d.eta_max;
      if (eta_max < 0) {
        eta_max = masked ? static_cast<int>(std::ceil(c.solver.dealias_fraction * 0.5 * g.ny())) - 1
                         : g.ny() / 2 - 1;
      }
      std::mt19937_64 rng(d.seed.value_or(c.seed));
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      SpectralField f(g);
      for (double nb : d.bands) {
        for (int k = 0; k < d.per_band; ++k) {
          const double r = nb * (1.0 + uni(rng));
          LatticePoint p{};
          if (d.placement == Placement::Rows) {
            // eta first, then xi on the circle of radius r
            const int ky = static_cast<int>(std::floor(uni(rng) * (2 * eta_max + 1))) - eta_max;
            const double sx = uni(rng) < 0.5 ? -1.0 : 1.0;
            const double xr = std::sqrt(std::max(r * r - double(ky) * ky, 0.0));
            p = {static_cast<int>(std::lround(sx * xr / g.dxi())), ky};
          } else {
            const double th = 2.0 * kPi * uni(rng);
            p = {static_cast<int>(std::lround(r * std::cos(th) / g.dxi())),
                 static_cast<int>(std::lround(r * std::sin(th)))};
          }
          const auto idx = g.index_of(p);
          if (!idx || !mask[*idx]) continue;
          f[*idx] = std::polar(d.amplitude * std::pow(nb, -d.decay), 2.0 * kPi * uni(rng));
        }
      }
      return f;
    }
    case DataKind::Snapshot: {
      Snapshot s = [&] {
        try {
          return load_snapshot(d.path);
        } catch (const IoError& e) {
          throw ConfigError("config: data.path: " + std::string(e.what()));
        }
      }();
      if (!(s.field.grid() == g)) fail("data.path", "snapshot grid differs from the config grid");
      return std::move(s.field);
    }
  }
  throw ConfigError("config: data.kind: unhandled kind");
}

ModifiedEnergyConfig modified_energy_config(const RunConfig& c, const MultiplierSpec& spec) {
  ModifiedEnergyConfig m;
  m.spec = spec;
  m.mode = c.diagnostics.quartic_mode;
  m.eps_amp = c.diagnostics.eps_amp;
  m.k_max = c.diagnostics.k_max;
  m.mode_cap = c.diagnostics.mode_cap;
  return m;
}

}  // namespace cylnls
