// Command-line front end: `rvrbm run` and `rvrbm bench`.
#include "rvrbm/error.hpp"
#include "rvrbm/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Options
{
  std::string config;
  std::string preset;
  std::string n, m, dt, t_end, seed, method, surrogate, sweep, repeats, out, threads;
  std::vector<std::string> sets;
};

void add_common(CLI::App& app, Options& o)
{
  app.add_option("--config,-c", o.config, "Config file ([section] key = value)");
  app.add_option("--preset", o.preset, "test1a, test1b, test2, test3 or custom");
  app.add_option("--n", o.n, "Number of particles");
  app.add_option("--m", o.m, "Batch size");
  app.add_option("--dt", o.dt, "Time step");
  app.add_option("--t-end", o.t_end, "Final time");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--method", o.method, "Comma list of full, rbm, rvrbm");
  app.add_option("--surrogate", o.surrogate, "case1, case2 or two_cluster_quadratic");
  app.add_option("--sweep", o.sweep, "Parameter sweep axis=v1,v2,... (axis is n or m)");
  app.add_option("--repeats", o.repeats, "Seeds per sweep point");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--threads", o.threads, "OpenMP threads (0 = default)");
  app.add_option("--set", o.sets, "Override any config key: section.key=value")->take_all();
}

rvrbm::Assignments overrides(const Options& o)
{
  rvrbm::Assignments a;
  const auto put = [&](const char* key, const std::string& value) {
    if (!value.empty())
      a.emplace_back(key, value);
  };
  put("experiment.preset", o.preset);
  put("sim.n", o.n);
  put("sim.m", o.m);
  put("sim.dt", o.dt);
  put("sim.t_end", o.t_end);
  put("sim.seed", o.seed);
  put("experiment.methods", o.method);
  put("cv.surrogate", o.surrogate);
  if (!o.sweep.empty()) {
    const auto eq = o.sweep.find('=');
    if (eq == std::string::npos)
      throw rvrbm::ConfigError("--sweep expects axis=v1,v2,... (got '" + o.sweep + "')");
    a.emplace_back("sweep.axis", o.sweep.substr(0, eq));
    a.emplace_back("sweep.values", o.sweep.substr(eq + 1));
  }
  put("sweep.repeats", o.repeats);
  put("experiment.out", o.out);
  put("experiment.threads", o.threads);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw rvrbm::ConfigError("--set expects key=value (got '" + s + "')");
    a.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return a;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Particle simulation of nonlocal mean-field models with random batches"};
  app.set_version_flag("--version", std::string(RVRBM_VERSION));
  app.require_subcommand(1);

  Options run_opts, bench_opts;
  auto* run = app.add_subcommand("run", "Run a preset or configured experiment");
  add_common(*run, run_opts);
  auto* bench = app.add_subcommand("bench", "Time single steps of full, rbm and rvrbm");
  add_common(*bench, bench_opts);
  bool list_keys = false;
  app.add_flag("--list-keys", list_keys, "Print all config keys and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (list_keys) {
      for (const auto& key : rvrbm::known_keys())
        std::cout << key << '\n';
      return 0;
    }
    if (run->parsed()) {
      const auto cfg = rvrbm::parse_config(run_opts.config, overrides(run_opts));
      const auto result = rvrbm::run_experiment(cfg);
      for (const auto& f : result.files)
        std::cout << f.string() << '\n';
      std::cout << (cfg.out_dir / "manifest.json").string() << '\n';
    } else {
      auto a = overrides(bench_opts);
      // Bench needs a model; fall back to the first opinion experiment.
      if (bench_opts.config.empty() && bench_opts.preset.empty())
        a.insert(a.begin(), {"experiment.preset", "test1a"});
      const auto cfg = rvrbm::parse_config(bench_opts.config, a);
      const auto result = rvrbm::bench(cfg);
      for (const auto& [method, secs] : result.step_seconds) {
        std::cout << method;
        for (double s : secs)
          std::cout << ' ' << s;
        std::cout << '\n';
      }
      std::cout << (cfg.out_dir / "bench.json").string() << '\n';
    }
    return 0;
  } catch (const rvrbm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const rvrbm::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const rvrbm::SimulationError& e) {
    std::cerr << "simulation error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
