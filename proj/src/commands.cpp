// commands.cpp

#include "cylnls/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "cylnls/errors.hpp"
#include "cylnls/io.hpp"
#include "svg_plot.hpp"

namespace cylnls {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// JSON number, or null when not finite.
json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// Output directory with a record of every file written.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw IoError("cannot create output directory '" + dir_.string() + "'");
  }

  const fs::path& dir() const { return dir_; }

  void write(const std::string& name, const std::string& content) {
    write_file_atomic(dir_ / name, content);
    record(name, sha256_hex(content));
  }

  void snapshot(const std::string& name, const SpectralField& f, double t) {
    save_snapshot(dir_ / name, f, t);
    record(name, sha256_file(dir_ / name));
  }

  const std::vector<std::string>& files() const { return files_; }
  const std::map<std::string, std::string>& sums() const { return sums_; }

 private:
  void record(const std::string& name, const std::string& sum) {
    if (!sums_.count(name)) files_.push_back(name);
    sums_[name] = sum;
  }

  fs::path dir_;
  std::vector<std::string> files_;
  std::map<std::string, std::string> sums_;
};

/// Runs f(0..n-1) on up to `jobs` threads. Results must go to per-index
/// slots; the first failure by index is rethrown.
template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F&& f) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string text() const {
    std::ostringstream o;
    for (std::size_t i = 0; i < header.size(); ++i) o << (i ? "," : "") << header[i];
    o << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) o << (i ? "," : "") << fmt(r[i]);
      o << "\n";
    }
    return o.str();
  }

  std::vector<double> column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return {};
    const auto k = static_cast<std::size_t>(it - header.begin());
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(k < r.size() ? r[k] : std::numeric_limits<double>::quiet_NaN());
    return out;
  }

  static Csv parse(const std::string& text) {
    Csv c;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      if (first) {
        c.header = cells;
        first = false;
        continue;
      }
      std::vector<double> row;
      for (const auto& s : cells) {
        try {
          row.push_back(std::stod(s));
        } catch (const std::exception&) {
          row.push_back(std::numeric_limits<double>::quiet_NaN());
        }
      }
      c.rows.push_back(row);
    }
    return c;
  }
};

/// SVG for one of the known CSV layouts, chosen by file name; empty if none.
std::string plot_for(const std::string& name, const Csv& c) {
  detail::PlotSpec p;
  auto series = [&](const std::string& label, const std::string& xc, const std::string& yc, bool abs_y = false) {
    detail::PlotSeries s;
    s.label = label;
    s.x = c.column(xc);
    s.y = c.column(yc);
    if (abs_y) {
      for (auto& v : s.y) v = std::abs(v);
    }
    p.series.push_back(s);
  };
  if (name == "diagnostics.csv") {
    p.title = "Diagnostics";
    p.x_label = "t";
    p.y_label = "value";
    series("mass", "t", "mass");
    series("energy", "t", "energy");
    series("Hs_norm", "t", "Hs_norm");
    for (auto& s : p.series) s.markers = false;
  } else if (name == "growth.csv") {
    p.title = "Sobolev norm growth (observational)";
    p.x_label = "<t>";
    p.y_label = "||u(t)||_Hs";
    p.log_x = p.log_y = true;
    series("Hs_norm", "japanese_t", "Hs_norm");
    series("running max", "japanese_t", "running_max");
    for (auto& s : p.series) s.markers = false;
  } else if (name == "energy_increment.csv") {
    p.title = "Modified energy increment per window";
    p.x_label = "N";
    p.y_label = "|E_I(delta0) - E_I(0)|";
    p.log_x = p.log_y = true;
    series("dt", "N", "increment", true);
    if (!c.column("increment_2dt").empty()) {
      series("2 dt", "N", "increment_2dt", true);
      p.series.back().dashed = true;
    }
  } else if (name.rfind("bilinear_", 0) == 0) {
    p.title = "Bilinear sweep: ratio to bound";
    p.x_label = "axis value";
    p.y_label = "||F|| / (bound ||phi1|| ||phi2||)";
    p.log_x = true;
    p.log_y = true;
    series("ratio (trials)", "axis_value", "ratio");
    series("norm (trials)", "axis_value", "norm");
  } else {
    return {};
  }
  return detail::render_svg(p);
}

void maybe_plot(Outputs& out, bool plots, const std::string& csv_name, const Csv& c) {
  if (!plots) return;
  const std::string svg = plot_for(csv_name, c);
  if (!svg.empty()) out.write(csv_name.substr(0, csv_name.size() - 4) + ".svg", svg);
}

void write_csv(Outputs& out, const RunConfig& cfg, const std::string& name, const Csv& c) {
  if (cfg.output.csv) out.write(name, c.text());
  maybe_plot(out, cfg.output.plots, name, c);
}

void write_json(Outputs& out, const RunConfig& cfg, const std::string& name, const json& j) {
  if (cfg.output.json) out.write(name, j.dump(2) + "\n");
}

/// Input checksums: the config as given and any snapshot it reads.
json input_checksums(const json& raw, const RunConfig& cfg) {
  json in;
  in["config_sha256"] = sha256_hex(raw.dump());
  if (cfg.data && cfg.data->kind == DataKind::Snapshot) {
    in["snapshots"] = {{cfg.data->path, sha256_file(cfg.data->path)}};
  } else {
    in["snapshots"] = json::object();
  }
  return in;
}

void write_manifest(Outputs& out, const std::string& command, const json& raw, const RunConfig& cfg,
                    const std::string& status, const std::string& message) {
  json files = json::object();
  for (const auto& [k, v] : out.sums()) files[k] = v;
  json m{{"format", "cylnls-run"},
         {"version", kVersion},
         {"command", command},
         {"seed", cfg.seed},
         {"status", status},
         {"message", message},
         {"inputs", input_checksums(raw, cfg)},
         {"outputs", files}};
  write_file_atomic(out.dir() / "manifest.json", m.dump(2) + "\n");
}

double hs_index(const RunConfig& c) { return c.diagnostics.hs_s.value_or(c.multiplier.s); }

SimulationOptions simulation_options(const RunConfig& c, bool frames) {
  SimulationOptions o;
  o.diag_every = c.diagnostics.every;
  o.frame_every = frames ? c.diagnostics.frame_every : 0;
  o.hs_s = hs_index(c);
  o.spec = c.multiplier;
  if (c.diagnostics.modified_energy) o.modified_energy = modified_energy_config(c, c.multiplier);
  return o;
}

Csv diagnostics_csv(const SimulationResult& r) {
  Csv c;
  c.header = {"t", "mass", "energy", "Hs_norm", "EI", "boundary_mass"};
  for (const auto& d : r.series) c.rows.push_back({d.t, d.mass, d.energy, d.hs_norm, d.ei, d.boundary_mass});
  return c;
}

json run_summary(const SimulationResult& r) {
  return {{"steps", r.steps},
          {"final_time", r.final_time},
          {"delta0", jnum(r.delta0)},
          {"window_starts", r.window_starts},
          {"aborted", r.aborted},
          {"abort_reason", r.abort_reason},
          {"max_mass_drift", r.max_mass_drift},
          {"boundary_flagged", r.boundary_flagged},
          {"max_boundary_mass", r.max_boundary_mass}};
}

// ---------------------------------------------------------------- commands

json cmd_simulate(const RunConfig& cfg, Outputs& out) {
  const SpectralField u0 = make_initial_data(cfg);
  const SimulationResult r = simulate(u0, cfg.solver, simulation_options(cfg, true));
  write_csv(out, cfg, "diagnostics.csv", diagnostics_csv(r));
  json frames = json::array();
  for (std::size_t k = 0; k < r.trace.size(); ++k) {
    char name[48];
    std::snprintf(name, sizeof name, "frames/frame_%06zu.snap", k);
    out.snapshot(name, r.trace.frame(k), r.trace.time(k));
    frames.push_back({{"file", name}, {"t", r.trace.time(k)}});
  }
  out.snapshot("final.snap", r.final_state, r.final_time);
  json trajectory{{"grid", {{"L_x", u0.grid().lx()}, {"n_x", u0.grid().nx()}, {"n_y", u0.grid().ny()}}},
                  {"frames", frames},
                  {"final", {{"file", "final.snap"}, {"t", r.final_time}}}};
  out.write("trajectory.json", trajectory.dump(2) + "\n");
  json s = run_summary(r);
  s["command"] = "simulate";
  write_json(out, cfg, "simulate.summary.json", s);
  if (r.aborted) throw NumericalError(r.abort_reason);
  return s;
}

json cmd_verify_bilinear(const RunConfig& cfg, Outputs& out, std::size_t jobs, std::vector<std::string>& warnings) {
  if (cfg.experiments.empty()) throw ConfigError("config: experiments: missing required key");
  json all = json::array();
  for (std::size_t i = 0; i < cfg.experiments.size(); ++i) {
    const ExperimentBlock& b = cfg.experiments[i];
    const Grid g = sweep_grid(b.sweep, b.lx);
    ExperimentReport rep;
    try {
      rep = scaling_sweep(g, b.sweep, jobs);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config: experiments[" + std::to_string(i) + "]: " + e.what());
    }
    const std::string stem = "bilinear_" + std::to_string(i);
    Csv c;
    c.header = {"axis_value", "trial", "norm", "data_norm", "bound", "ratio", "t_star", "tail", "reliable"};
    const bool unref = b.sweep.compare_unrefined && b.sweep.base.variant == BilinearVariant::Angular;
    if (unref) c.header.push_back("unrefined_norm");
    for (const auto& r : rep.rows) {
      c.rows.push_back({r.axis_value, double(r.trial), r.norm, r.data_norm, r.bound, r.ratio, r.t_star, r.tail,
                        r.reliable ? 1.0 : 0.0});
      if (unref) c.rows.back().push_back(r.unrefined_norm);
    }
    write_csv(out, cfg, stem + ".csv", c);
    json axis = json::array();
    for (const auto& a : rep.summary) {
      json row{{"axis_value", a.axis_value}, {"max_norm", a.max_norm}, {"max_ratio", a.max_ratio}, {"bound", a.bound}};
      if (unref) {
        row["unrefined_bound"] = a.unrefined_bound;
        row["max_unrefined_norm"] = a.max_unrefined_norm;
      }
      axis.push_back(row);
    }
    auto fit = [](const LineFit& f) {
      return f.valid ? json{{"slope", f.slope}, {"intercept", f.intercept}, {"residual", f.residual}}
                     : json(nullptr);
    };
    json s{{"variant", variant_name(b.sweep.base.variant)},
           {"axis", axis_name(b.sweep.axis)},
           {"grid", {{"L_x", g.lx()}, {"n_x", g.nx()}, {"n_y", g.ny()}}},
           {"slope", rep.norm_fit.valid ? jnum(rep.norm_fit.slope) : json(nullptr)},
           {"residual", rep.norm_fit.valid ? jnum(rep.norm_fit.residual) : json(nullptr)},
           {"norm_fit", fit(rep.norm_fit)},
           {"ratio_fit", fit(rep.ratio_fit)},
           {"C_max", rep.c_max},
           {"T_star", rep.t_star_max},
           {"unreliable_trials", rep.unreliable},
           {"per_axis", axis},
           {"warnings", rep.warnings}};
    for (const auto& w : rep.warnings) warnings.push_back(stem + ": " + w);
    write_json(out, cfg, stem + ".summary.json", s);
    all.push_back(s);
  }
  json s{{"command", "verify-bilinear"}, {"experiments", all}};
  write_json(out, cfg, "verify_bilinear.summary.json", s);
  return s;
}

json cmd_energy_increment(const RunConfig& cfg, Outputs& out, std::size_t jobs, std::vector<std::string>& warnings) {
  const SpectralField u0 = make_initial_data(cfg);
  const auto& ns = cfg.energy_increment.n_values;
  const bool check = cfg.energy_increment.dt_check;
  std::vector<IncrementRow> base(ns.size()), twice(ns.size());
  parallel_for(ns.size() * (check ? 2 : 1), jobs, [&](std::size_t task) {
    const std::size_t i = task % ns.size();
    MultiplierSpec spec = cfg.multiplier;
    spec.n = ns[i];
    const auto me = modified_energy_config(cfg, spec);
    if (task < ns.size()) {
      base[i] = energy_increment_window(u0, spec, cfg.solver, me, cfg.solver.dt);
    } else {
      twice[i] = energy_increment_window(u0, spec, cfg.solver, me, 2.0 * cfg.solver.dt);
    }
  });
  Csv c;
  c.header = {"N", "dt", "delta0", "steps", "EI0", "EI1", "increment"};
  if (check) c.header.insert(c.header.end(), {"increment_2dt", "rel_change_2dt"});
  std::vector<double> lx, ly;
  double max_change = 0.0;
  bool monotone = true;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const auto& r = base[i];
    c.rows.push_back({r.n, r.dt, r.delta0, double(r.steps), r.ei0, r.ei1, r.increment});
    if (check) {
      const double ch = std::abs(twice[i].increment - r.increment) / std::max(std::abs(r.increment), 1e-300);
      max_change = std::max(max_change, ch);
      c.rows.back().insert(c.rows.back().end(), {twice[i].increment, ch});
    }
    if (i > 0 && std::abs(r.increment) >= std::abs(base[i - 1].increment)) monotone = false;
    lx.push_back(std::log(r.n));
    ly.push_back(std::log(std::max(std::abs(r.increment), 1e-300)));
  }
  write_csv(out, cfg, "energy_increment.csv", c);
  const LineFit f = fit_line(lx, ly);
  json s{{"command", "energy-increment"},
         {"N_values", ns},
         {"slope", f.valid ? jnum(f.slope) : json(nullptr)},
         {"residual", f.valid ? jnum(f.residual) : json(nullptr)},
         {"monotone_decrease", monotone},
         {"dt", cfg.solver.dt},
         {"max_rel_change_2dt", check ? jnum(max_change) : json(nullptr)},
         {"substep", substep_name(cfg.solver.substep)}};
  if (!f.valid) {
    warnings.push_back("fewer than 4 N values: no slope fitted");
    s["warnings"] = {"fewer than 4 N values: no slope fitted"};
  }
  write_json(out, cfg, "energy_increment.summary.json", s);
  return s;
}

json cmd_symbol_sample(const RunConfig& cfg, Outputs& out, std::size_t jobs) {
  const auto& b = cfg.symbol_sample;
  std::vector<BoundSamplingSummary> res(b.regimes.size());
  parallel_for(b.regimes.size(), jobs, [&](std::size_t i) {
    res[i] = sample_bounds(cfg.multiplier, b.regimes[i], b.samples, cfg.seed + i, b.radius, b.keep_rows);
  });
  json regimes = json::array();
  for (const auto& r : res) {
    const std::string name(regime_name(r.regime));
    Csv c;
    c.header = {"lhs", "rhs", "ratio", "violation"};
    for (const auto& row : r.rows) c.rows.push_back({row.lhs, row.rhs, row.ratio, row.violation ? 1.0 : 0.0});
    std::string file = "symbol_sample_" + name + ".csv";
    std::replace(file.begin(), file.end(), '-', '_');
    write_csv(out, cfg, file, c);
    const double change =
        r.max_ratio > 0.0 ? std::abs(r.max_ratio - r.max_ratio_first_half) / r.max_ratio : 0.0;
    regimes.push_back({{"regime", name},
                       {"seed", r.seed},
                       {"requested", r.requested},
                       {"accepted", r.accepted},
                       {"rejected", r.rejected},
                       {"violations", r.violations},
                       {"max_ratio", r.max_ratio},
                       {"max_ratio_first_half", r.max_ratio_first_half},
                       {"doubling_change", change}});
  }
  json s{{"command", "symbol-sample"}, {"multiplier", {{"s", cfg.multiplier.s}, {"N", cfg.multiplier.n}}},
         {"radius", b.radius}, {"regimes", regimes}};
  write_json(out, cfg, "symbol_sample.summary.json", s);
  return s;
}

json cmd_growth_study(const RunConfig& cfg, Outputs& out) {
  const SpectralField u0 = make_initial_data(cfg);
  const SimulationResult r = simulate(u0, cfg.solver, simulation_options(cfg, false));
  Csv c;
  c.header = {"t", "japanese_t", "Hs_norm", "running_max", "mass", "energy"};
  std::vector<double> ts, hs;
  double run = 0.0;
  for (const auto& d : r.series) {
    run = std::max(run, d.hs_norm);
    c.rows.push_back({d.t, std::sqrt(1.0 + d.t * d.t), d.hs_norm, run, d.mass, d.energy});
    ts.push_back(d.t);
    hs.push_back(d.hs_norm);
  }
  write_csv(out, cfg, "growth.csv", c);
  out.snapshot("final.snap", r.final_state, r.final_time);
  const GrowthFit f = fit_growth(ts, hs, cfg.growth.fit_from);
  const double s_idx = hs_index(cfg);
  json s{{"command", "growth-study"},
         {"observational", true},
         {"note", "least-squares exponent of the running maximum of ||u(t)||_Hs against <t>; "
                  "an observation over a finite horizon, not a check of the growth bound"},
         {"hs_s", s_idx},
         {"horizon", r.final_time},
         {"exponent", f.valid ? jnum(f.exponent) : json(nullptr)},
         {"residual", f.valid ? jnum(f.residual) : json(nullptr)},
         {"fit_points", f.points},
         {"fit_from", cfg.growth.fit_from},
         {"reference_exponent", (s_idx - 1.0) / 2.0},
         {"final_state_sha256", out.sums().at("final.snap")},
         {"run", run_summary(r)}};
  write_json(out, cfg, "growth.summary.json", s);
  if (r.aborted) throw NumericalError(r.abort_reason);
  return s;
}

json cmd_report(const RunConfig& cfg, Outputs& out) {
  std::vector<fs::path> summaries, csvs;
  for (const auto& e : fs::recursive_directory_iterator(out.dir())) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (name.size() > 13 && name.substr(name.size() - 13) == ".summary.json") summaries.push_back(e.path());
    if (name.size() > 4 && name.substr(name.size() - 4) == ".csv") csvs.push_back(e.path());
  }
  std::sort(summaries.begin(), summaries.end());
  std::sort(csvs.begin(), csvs.end());
  json index = json::object();
  std::ostringstream md;
  md << "# Run report\n\n";
  for (const auto& p : summaries) {
    const std::string rel = fs::relative(p, out.dir()).string();
    json j;
    try {
      j = json::parse(read_file(p));
    } catch (const std::exception& e) {
      throw IoError("report: cannot read '" + rel + "': " + e.what());
    }
    index[rel] = j;
    md << "## " << rel << "\n\n";
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it->is_primitive()) md << "- " << it.key() << ": " << it->dump() << "\n";
    }
    md << "\n";
  }
  if (summaries.empty()) md << "No summaries found in this directory.\n";
  std::size_t plots = 0;
  if (cfg.output.plots) {
    for (const auto& p : csvs) {
      const std::string rel = fs::relative(p, out.dir()).string();
      const std::string svg = plot_for(p.filename().string(), Csv::parse(read_file(p)));
      if (svg.empty()) continue;
      out.write(rel.substr(0, rel.size() - 4) + ".svg", svg);
      ++plots;
    }
  }
  out.write("report.md", md.str());
  json s{{"command", "report"}, {"summaries", index}, {"plots", plots}};
  out.write("report.json", s.dump(2) + "\n");
  return s;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate",      "verify-bilinear", "energy-increment",
                                              "symbol-sample", "growth-study",    "report"};
  return names;
}

GrowthFit fit_growth(const std::vector<double>& t, const std::vector<double>& h, double t_from) {
  std::vector<double> x, y;
  double run = 0.0;
  for (std::size_t i = 0; i < std::min(t.size(), h.size()); ++i) {
    run = std::max(run, h[i]);
    if (t[i] < t_from || !(run > 0.0)) continue;
    x.push_back(0.5 * std::log1p(t[i] * t[i]));
    y.push_back(std::log(run));
  }
  GrowthFit g;
  g.points = x.size();
  const LineFit f = fit_line(x, y, 2);
  if (!f.valid) return g;
  g.exponent = f.slope;
  g.residual = f.residual;
  g.valid = true;
  return g;
}

IncrementRow energy_increment_window(const SpectralField& u0, const MultiplierSpec& spec, const SolverConfig& solver,
                                     const ModifiedEnergyConfig& me, double dt) {
  IncrementRow r;
  r.n = spec.n;
  r.delta0 = local_window_length(u0, spec, solver);
  if (!std::isfinite(r.delta0)) throw NumericalError("energy increment: zero data gives an unbounded window");
  r.steps = static_cast<std::size_t>(std::ceil(r.delta0 / dt - 1e-9));
  r.steps = std::max<std::size_t>(r.steps, 1);
  r.dt = r.delta0 / static_cast<double>(r.steps);
  StrangStepper st(u0.grid(), solver);
  SpectralField u = u0;
  if (solver.nonlinear) st.project(u);
  r.ei0 = modified_energy(u, me);
  for (std::size_t k = 0; k < r.steps; ++k) st.step(u, r.dt);
  r.ei1 = modified_energy(u, me);
  r.increment = r.ei1 - r.ei0;
  return r;
}

CommandOutcome run_command(const std::string& name, const json& raw_in, const CommandOptions& opt) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw ConfigError("unknown command '" + name + "'");
  }
  json raw = raw_in;
  if (opt.seed) {
    if (!raw.is_object()) throw ConfigError("config: expected an object");
    raw["seed"] = *opt.seed;
  }
  RunConfig cfg = parse_run_config(raw);
  if (opt.plots) cfg.output.plots = *opt.plots;
  if (!opt.out_dir.empty()) cfg.output.dir = opt.out_dir;
  const std::size_t jobs = std::max<std::size_t>(opt.jobs, 1);

  Outputs out(cfg.output.dir);
  CommandOutcome res;
  res.out_dir = out.dir().string();
  const json resolved = resolve(cfg);
  out.write("resolved_config.json", resolved.dump(2) + "\n");

  auto finish = [&](const std::string& status, const std::string& message) {
    write_manifest(out, name, raw, cfg, status, message);
    res.files = out.files();
    res.files.push_back("manifest.json");
  };
  try {
    try {
      if (name == "simulate") {
        res.summary = cmd_simulate(cfg, out);
      } else if (name == "verify-bilinear") {
        res.summary = cmd_verify_bilinear(cfg, out, jobs, res.warnings);
      } else if (name == "energy-increment") {
        res.summary = cmd_energy_increment(cfg, out, jobs, res.warnings);
      } else if (name == "symbol-sample") {
        res.summary = cmd_symbol_sample(cfg, out, jobs);
      } else if (name == "growth-study") {
        res.summary = cmd_growth_study(cfg, out);
      } else {
        res.summary = cmd_report(cfg, out);
      }
    } catch (const std::invalid_argument& e) {
      // library preconditions reached from config values
      throw ConfigError(std::string("config: ") + e.what());
    }
  } catch (const ConfigError& e) {
    finish("config-error", e.what());
    throw;
  } catch (const NumericalError& e) {
    finish("numerical-failure", e.what());
    throw;
  } catch (const ComplexityError& e) {
    finish("complexity-guard", e.what());
    throw;
  }
  finish("ok", "");
  return res;
}

}  // namespace cylnls
