// cylnls_cli.cpp
// Command-line front end. Talks to the library only through the C API.

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "cylnls/cylnls.h"

namespace {

int exit_code(cylnls_status s) {
  switch (s) {
    case CYLNLS_OK: return 0;
    case CYLNLS_ERR_NUMERICAL: return 3;
    case CYLNLS_ERR_COMPLEXITY: return 4;
    case CYLNLS_ERR_CONFIG:
    case CYLNLS_ERR_IO:
    case CYLNLS_ERR_INVALID: return 2;
    case CYLNLS_ERR_INTERNAL: return 1;
  }
  return 1;
}

struct Args {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool plots = false;
};

int run(const std::string& command, const Args& a, bool has_seed, bool has_plots) {
  cylnls_config* cfg = nullptr;
  cylnls_status s = cylnls_config_load(a.config.c_str(), &cfg);
  if (s != CYLNLS_OK) {
    std::fprintf(stderr, "error (%s): %s\n", cylnls_status_name(s), cylnls_last_error());
    return exit_code(s);
  }
  cylnls_run_options opt;
  cylnls_run_options_init(&opt);
  if (!a.out.empty()) opt.out_dir = a.out.c_str();
  opt.has_seed = has_seed ? 1 : 0;
  opt.seed = a.seed;
  opt.jobs = a.jobs;
  opt.plots = has_plots ? 1 : -1;

  cylnls_result* res = nullptr;
  s = cylnls_run_command(command.c_str(), cfg, &opt, &res);
  cylnls_config_free(cfg);
  if (s != CYLNLS_OK) {
    std::fprintf(stderr, "error (%s): %s\n", cylnls_status_name(s), cylnls_last_error());
    return exit_code(s);
  }
  for (std::size_t i = 0; i < cylnls_result_warning_count(res); ++i) {
    std::fprintf(stderr, "warning: %s\n", cylnls_result_warning(res, i));
  }
  std::printf("%s: wrote %zu files to %s\n", command.c_str(), cylnls_result_file_count(res),
              cylnls_result_out_dir(res));
  cylnls_result_free(res);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments for the cubic NLS on R x T"};
  app.set_version_flag("--version", std::string(cylnls_version()));
  app.require_subcommand(1);

  Args args;
  std::string chosen;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* plots_opt = nullptr;
  std::vector<CLI::Option*> seed_opts, plot_opts;

  const char* help[] = {
      "integrate one trajectory and record diagnostics",
      "run bilinear scaling sweeps",
      "modified-energy increment over one local window, per N",
      "Monte Carlo check of the symbol bounds",
      "long-time Sobolev norm growth (observational)",
      "collect summaries and plots in the output directory",
  };
  for (std::size_t i = 0; i < cylnls_command_count(); ++i) {
    const std::string name = cylnls_command_name(i);
    CLI::App* sub = app.add_subcommand(name, i < 6 ? help[i] : "");
    sub->add_option("--config", args.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", args.out, "output directory (default: output.dir from the config)");
    seed_opts.push_back(sub->add_option("--seed", args.seed, "replace the config seed"));
    sub->add_option("--jobs", args.jobs, "worker threads")->check(CLI::Range(1u, 4096u));
    plot_opts.push_back(sub->add_flag("--plots", args.plots, "write SVG plots"));
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  for (std::size_t i = 0; i < seed_opts.size(); ++i) {
    if (*seed_opts[i]) seed_opt = seed_opts[i];
    if (*plot_opts[i]) plots_opt = plot_opts[i];
  }
  return run(chosen, args, seed_opt != nullptr, plots_opt != nullptr);
}
