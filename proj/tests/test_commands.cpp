#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "cylnls/commands.hpp"
#include "cylnls/cylnls.h"
#include "cylnls/diagnostics.hpp"
#include "cylnls/errors.hpp"
#include "cylnls/io.hpp"

using namespace cylnls;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cylnls_test_commands") / name;
  fs::remove_all(p);
  return p;
}

json sim_config() {
  return json::parse(R"({
    "seed": 5,
    "grid": {"L_x": 31.41592653589793, "n_x": 64, "n_y": 8},
    "solver": {"dt": 0.01, "T_end": 0.5},
    "data": {"kind": "packet", "amplitude": 0.5, "width": 2.0, "kick": 1.0, "eta": 1},
    "diagnostics": {"every": 5, "frame_every": 25}
  })");
}

json sweep_config() {
  return json::parse(R"({
    "seed": 2,
    "experiments": [{"variant": "separation", "axis": "M", "values": [4, 8, 16, 32],
                     "N1": 32, "N2": 128, "trials": 2, "localize": 1.5, "slab": 1,
                     "eta_window": 4, "method": "pair-sum", "L_x": 100.53096491487338}]
  })");
}

CommandOptions to(const fs::path& dir, std::size_t jobs = 1) {
  CommandOptions o;
  o.out_dir = dir.string();
  o.jobs = jobs;
  return o;
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

}  // namespace

TEST_CASE("growth fit recovers a power of <t>") {
  std::vector<double> t, h;
  for (int k = 0; k <= 200; ++k) {
    t.push_back(0.5 * k);
    h.push_back(3.0 * std::pow(1.0 + t.back() * t.back(), 0.5 * 0.3));
  }
  const GrowthFit f = fit_growth(t, h, 1.0);
  REQUIRE(f.valid);
  CHECK(f.exponent == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(f.residual < 1e-12);
  CHECK(f.points == 199);

  // a decaying norm: the running maximum is flat
  std::vector<double> d;
  for (double x : t) d.push_back(1.0 / (1.0 + x));
  CHECK(fit_growth(t, d, 1.0).exponent == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_FALSE(fit_growth({0.0, 1.0}, {1.0, 1.0}, 0.5).valid);
}

TEST_CASE("increment window splits delta0 into whole steps") {
  const RunConfig c = parse_run_config(sim_config());
  const SpectralField u0 = make_initial_data(c);
  MultiplierSpec spec = c.multiplier;
  spec.n = 4;
  ModifiedEnergyConfig me = modified_energy_config(c, spec);
  const IncrementRow r = energy_increment_window(u0, spec, c.solver, me, 0.01);
  CHECK(r.steps >= 1);
  CHECK(r.dt <= 0.01 * (1 + 1e-12));
  CHECK(r.dt * static_cast<double>(r.steps) == doctest::Approx(r.delta0).epsilon(1e-14));
  CHECK(r.increment == doctest::Approx(r.ei1 - r.ei0));
  CHECK(r.delta0 == doctest::Approx(local_window_length(u0, spec, c.solver)));

  CHECK_THROWS_AS(energy_increment_window(SpectralField(u0.grid()), spec, c.solver, me, 0.01), NumericalError);
}

TEST_CASE("simulate writes a manifest that checks out") {
  const fs::path dir = scratch("simulate");
  const CommandOutcome r = run_command("simulate", sim_config(), to(dir));
  const json m = read_json(dir / "manifest.json");
  CHECK(m["status"] == "ok");
  CHECK(m["seed"] == 5);
  CHECK(m["version"] == kVersion);
  CHECK_FALSE(m.contains("timestamp"));
  for (const auto& name : {"diagnostics.csv", "final.snap", "trajectory.json", "simulate.summary.json",
                           "resolved_config.json", "frames/frame_000000.snap", "frames/frame_000002.snap"}) {
    INFO(name);
    REQUIRE(fs::exists(dir / name));
    CHECK(m["outputs"][name] == sha256_hex(read_file(dir / name)));
  }
  CHECK(r.files.size() == m["outputs"].size() + 1);

  // the final snapshot matches the last frame and keeps the mass
  const Snapshot last = load_snapshot(dir / "final.snap");
  CHECK(last.time == doctest::Approx(0.5));
  const Snapshot first = load_snapshot(dir / "frames/frame_000000.snap");
  CHECK(mass(last.field) == doctest::Approx(mass(first.field)).epsilon(1e-9));

  // resolved config reproduces the run byte for byte
  const fs::path again = scratch("simulate_again");
  json resolved = read_json(dir / "resolved_config.json");
  resolved["output"]["dir"] = again.string();
  run_command("simulate", resolved, CommandOptions{});
  CHECK(read_file(dir / "diagnostics.csv") == read_file(again / "diagnostics.csv"));
  CHECK(read_file(dir / "final.snap") == read_file(again / "final.snap"));
}

TEST_CASE("sweep outputs do not depend on the thread count") {
  const fs::path a = scratch("sweep_1");
  const fs::path b = scratch("sweep_3");
  run_command("verify-bilinear", sweep_config(), to(a, 1));
  run_command("verify-bilinear", sweep_config(), to(b, 3));
  CHECK(read_file(a / "bilinear_0.csv") == read_file(b / "bilinear_0.csv"));
  CHECK(read_file(a / "bilinear_0.summary.json") == read_file(b / "bilinear_0.summary.json"));
  // manifests differ only through output.dir in the resolved config
  json ma = read_json(a / "manifest.json");
  json mb = read_json(b / "manifest.json");
  ma["outputs"].erase("resolved_config.json");
  mb["outputs"].erase("resolved_config.json");
  CHECK(ma == mb);
  const json s = read_json(a / "bilinear_0.summary.json");
  CHECK(s["unreliable_trials"] == 0);
  CHECK(s["ratio_fit"]["slope"].get<double>() < 0.1);
}

TEST_CASE("the seed option replaces the config seed") {
  const fs::path a = scratch("seed_a");
  CommandOptions o = to(a);
  o.seed = 77;
  run_command("verify-bilinear", sweep_config(), o);
  CHECK(read_json(a / "manifest.json")["seed"] == 77);
  CHECK(read_json(a / "resolved_config.json")["experiments"][0]["seed"] == 77);
  const fs::path b = scratch("seed_b");
  run_command("verify-bilinear", sweep_config(), to(b));
  CHECK(read_file(a / "bilinear_0.csv") != read_file(b / "bilinear_0.csv"));
}

TEST_CASE("failures keep partial results and record the status") {
  json bad = sim_config();
  bad["solver"] = {{"dt", 0.5}, {"T_end", 50.0}};
  bad["data"]["amplitude"] = 40.0;
  const fs::path dir = scratch("numerical");
  CHECK_THROWS_AS(run_command("simulate", bad, to(dir)), NumericalError);
  CHECK(read_json(dir / "manifest.json")["status"] == "numerical-failure");
  CHECK(fs::exists(dir / "diagnostics.csv"));
  CHECK(read_json(dir / "simulate.summary.json")["aborted"] == true);

  json tight = sweep_config();
  tight["experiments"][0]["max_pairs"] = 10;
  const fs::path d2 = scratch("complexity");
  CHECK_THROWS_AS(run_command("verify-bilinear", tight, to(d2)), ComplexityError);
  CHECK(read_json(d2 / "manifest.json")["status"] == "complexity-guard");

  CHECK_THROWS_AS(run_command("verify-bilinear", sim_config(), to(scratch("noexp"))), ConfigError);
  CHECK_THROWS_AS(run_command("simulate", json::parse(R"({"seed": 1})"), to(scratch("nogrid"))), ConfigError);
  CHECK_THROWS_AS(run_command("teleport", sim_config(), to(scratch("nocmd"))), ConfigError);
}

TEST_CASE("symbol sampling is reproducible and finds no violations") {
  json c = json::parse(R"({"seed": 11, "multiplier": {"s": 2, "N": 16},
                           "symbol_sample": {"samples": 4000, "keep_rows": 10}})");
  const fs::path a = scratch("symbol_a");
  const fs::path b = scratch("symbol_b");
  run_command("symbol-sample", c, to(a, 1));
  run_command("symbol-sample", c, to(b, 3));
  CHECK(read_file(a / "symbol_sample.summary.json") == read_file(b / "symbol_sample.summary.json"));
  const json s = read_json(a / "symbol_sample.summary.json");
  REQUIRE(s["regimes"].size() == 3);
  for (const auto& r : s["regimes"]) {
    CHECK(r["accepted"] == 4000);
    CHECK(r["violations"] == 0);
  }
}

TEST_CASE("report collects summaries and draws plots") {
  const fs::path dir = scratch("report");
  json c = sim_config();
  c["solver"]["T_end"] = 2.0;
  run_command("growth-study", c, to(dir));
  CommandOptions o = to(dir);
  o.plots = true;
  const CommandOutcome r = run_command("report", c, o);
  CHECK(r.summary["summaries"].contains("growth.summary.json"));
  CHECK(fs::exists(dir / "report.md"));
  CHECK(fs::exists(dir / "growth.svg"));
  CHECK(read_file(dir / "growth.svg").rfind("<svg", 0) == 0);
  const json g = read_json(dir / "growth.summary.json");
  CHECK(g["observational"] == true);
  CHECK(g["reference_exponent"].get<double>() == doctest::Approx(0.5));
}

TEST_CASE("C API reports status codes and messages") {
  cylnls_config* c = nullptr;
  CHECK(cylnls_config_parse("{\"grid\": {\"L_x\": 1}}", &c) == CYLNLS_ERR_CONFIG);
  CHECK(c == nullptr);
  CHECK(std::string(cylnls_last_error()).find("grid.n_x") != std::string::npos);
  CHECK(cylnls_config_parse("{ nope", &c) == CYLNLS_ERR_CONFIG);
  CHECK(cylnls_config_load("/nonexistent.json", &c) == CYLNLS_ERR_CONFIG);
  CHECK(cylnls_config_parse(nullptr, &c) == CYLNLS_ERR_INVALID);
  CHECK(std::string(cylnls_status_name(CYLNLS_ERR_COMPLEXITY)) == "complexity guard");

  REQUIRE(cylnls_config_parse(sim_config().dump().c_str(), &c) == CYLNLS_OK);
  CHECK(cylnls_config_seed(c) == 5);
  CHECK(json::parse(cylnls_config_resolved(c))["grid"]["n_x"] == 64);

  cylnls_field* f = nullptr;
  REQUIRE(cylnls_field_initial(c, &f) == CYLNLS_OK);
  double lx = 0;
  int nx = 0, ny = 0;
  cylnls_field_shape(f, &lx, &nx, &ny);
  CHECK(nx == 64);
  CHECK(ny == 8);
  std::vector<double> buf(2 * 64 * 8);
  CHECK(cylnls_field_coefficients(f, buf.data(), 10) == CYLNLS_ERR_INVALID);
  REQUIRE(cylnls_field_coefficients(f, buf.data(), buf.size()) == CYLNLS_OK);
  double sum = 0;
  for (double v : buf) sum += v * v;
  // mass = dxi dy sum |uhat|^2 over the lattice
  CHECK(cylnls_field_mass(f) == doctest::Approx(sum * (2 * M_PI / lx) * 1.0).epsilon(1e-12));

  const fs::path dir = scratch("capi");
  const std::string snap = (dir / "u0.snap").string();
  REQUIRE(cylnls_field_save(f, snap.c_str(), 0.25) == CYLNLS_OK);
  cylnls_field* g = nullptr;
  double t = 0;
  REQUIRE(cylnls_field_load(snap.c_str(), &g, &t) == CYLNLS_OK);
  CHECK(t == 0.25);
  CHECK(cylnls_field_energy(g) == cylnls_field_energy(f));
  cylnls_field_free(g);
  cylnls_field_free(f);
  CHECK(cylnls_field_load((dir / "missing.snap").string().c_str(), &g, &t) == CYLNLS_ERR_IO);

  cylnls_run_options o;
  cylnls_run_options_init(&o);
  const std::string out = (dir / "run").string();
  o.out_dir = out.c_str();
  cylnls_result* r = nullptr;
  CHECK(cylnls_run_command("nonsense", c, &o, &r) == CYLNLS_ERR_CONFIG);
  REQUIRE(cylnls_run_command("simulate", c, &o, &r) == CYLNLS_OK);
  CHECK(std::string(cylnls_result_out_dir(r)) == out);
  CHECK(cylnls_result_file_count(r) > 4);
  CHECK(json::parse(cylnls_result_summary(r))["steps"] == 50);
  cylnls_result_free(r);
  cylnls_config_free(c);

  CHECK(cylnls_command_count() == 6);
  CHECK(std::string(cylnls_command_name(5)) == "report");
  CHECK(cylnls_command_name(6) == nullptr);
}
