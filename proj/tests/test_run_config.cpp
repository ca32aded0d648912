#include <doctest.h>

#include <cmath>
#include <string>

#include "cylnls/diagnostics.hpp"
#include "cylnls/errors.hpp"
#include "cylnls/run_config.hpp"
#include "oracles.hpp"

using namespace cylnls;
using nlohmann::json;

namespace {

constexpr double kPi = oracle::pi;

json base_config() {
  return json::parse(R"({
    "seed": 4,
    "grid": {"L_x": 62.83185307179586, "n_x": 128, "n_y": 16},
    "solver": {"dt": 0.01, "T_end": 0.5},
    "data": {"kind": "packet", "amplitude": 0.7, "width": 1.5, "kick": 2.0, "eta": 1}
  })");
}

std::string config_error(const json& j) {
  try {
    parse_run_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("unknown keys are rejected with their path") {
  json j = base_config();
  j["solver"]["step"] = 0.1;
  const std::string msg = config_error(j);
  CHECK(msg.find("solver.step") != std::string::npos);
  CHECK(msg.find("unknown key") != std::string::npos);

  j = base_config();
  j["bogus"] = 1;
  CHECK(config_error(j).find("bogus") != std::string::npos);

  j = base_config();
  j["experiments"] = json::array({{{"variant", "separation"}, {"axis", "M"}, {"values", {2, 4}}, {"typo", 1}}});
  CHECK(config_error(j).find("experiments[0].typo") != std::string::npos);
}

TEST_CASE("missing required keys and bad values name the key") {
  json j = base_config();
  j["grid"].erase("n_y");
  CHECK(config_error(j).find("grid.n_y") != std::string::npos);

  j = base_config();
  j["data"].erase("kind");
  CHECK(config_error(j).find("data.kind") != std::string::npos);

  j = base_config();
  j["grid"]["n_x"] = "many";
  CHECK(config_error(j).find("grid.n_x") != std::string::npos);

  j = base_config();
  j["grid"]["n_x"] = 7;  // odd sizes are not supported
  CHECK_FALSE(config_error(j).empty());

  j = base_config();
  j["solver"]["dt"] = -1.0;
  const std::string msg = config_error(j);
  CHECK(msg.find("solver") != std::string::npos);
  CHECK(msg.find("dt") != std::string::npos);

  j = base_config();
  j["data"]["kind"] = "spiral";
  CHECK(config_error(j).find("data.kind") != std::string::npos);

  CHECK_THROWS_AS(parse_run_config_text("{ not json"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(json::array()), ConfigError);
  CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("a config without grid or data fails only when a command needs them") {
  const RunConfig c = parse_run_config(json::parse(R"({"seed": 9})"));
  CHECK(c.seed == 9);
  CHECK_THROWS_AS(c.require_grid(), ConfigError);
  CHECK_THROWS_AS(c.require_data(), ConfigError);
  CHECK_THROWS_AS(make_initial_data(c), ConfigError);
}

TEST_CASE("resolved config is a fixed point") {
  json j = base_config();
  j["experiments"] = json::array({{{"variant", "angular"}, {"axis", "theta"}, {"values", {0.125, 0.25}}}});
  j["diagnostics"] = {{"modified_energy", {{"mode", "thresholded"}, {"eps_amp", 1e-4}}}};
  const json r1 = resolve(parse_run_config(j));
  const json r2 = resolve(parse_run_config(r1));
  CHECK(r1 == r2);
  CHECK(r1.dump() == r2.dump());
  // defaults are spelled out
  CHECK(r1["solver"].contains("dealias_fraction"));
  CHECK(r1["experiments"][0].contains("trials"));
  CHECK(r1["experiments"][0]["seed"] == 4);
}

TEST_CASE("plane wave data is a single mode with the right mass") {
  json j = base_config();
  j["data"] = {{"kind", "plane_wave"}, {"amplitude", 0.3}, {"kx", 5}, {"ky", -2}};
  const RunConfig c = parse_run_config(j);
  const SpectralField u = make_initial_data(c);
  const Grid& g = u.grid();
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(u[i]) > 1e-12 * std::abs(u.at({5, -2}))) ++nonzero;
  }
  CHECK(nonzero == 1);
  CHECK(mass(u) == doctest::Approx(0.09 * g.lx() * 2 * kPi).epsilon(1e-12));
}

TEST_CASE("packet data matches the Gaussian mass") {
  const RunConfig c = parse_run_config(base_config());
  const SpectralField u = make_initial_data(c);
  // int |A exp(-x^2/(2w^2))|^2 dx dy = A^2 w sqrt(pi) 2 pi
  const double expect = 0.49 * 1.5 * std::sqrt(kPi) * 2 * kPi;
  CHECK(mass(u) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("multi-band data is seeded and respects the dealias mask") {
  json j = base_config();
  j["data"] = {{"kind", "multi_band"}, {"bands", {2, 4, 8}}, {"per_band", 4}};
  const SpectralField a = make_initial_data(parse_run_config(j));
  const SpectralField b = make_initial_data(parse_run_config(j));
  CHECK(a.data() == b.data());
  j["seed"] = 5;
  const SpectralField c = make_initial_data(parse_run_config(j));
  CHECK(a.data() != c.data());
  j["data"]["seed"] = 4;  // an explicit data seed overrides the run seed
  const SpectralField d = make_initial_data(parse_run_config(j));
  CHECK(a.data() == d.data());

  const auto mask = dealias_mask(a.grid(), 2.0 / 3.0);
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < a.grid().size(); ++i) {
    if (a[i] == Complex{}) continue;
    ++nonzero;
    CHECK(mask[i]);
    const Freq z = a.grid().freq(i);
    CHECK(z.norm() >= 2.0);
    CHECK(z.norm() < 16.0);
  }
  CHECK(nonzero > 0);
  CHECK(nonzero <= 12);
}
