#include "qproc/expcli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

using namespace qproc::expcli;

std::size_t parse_env_workers(const char* v) {
  try {
    std::size_t used = 0;
    const long long n = std::stoll(v, &used);
    if (used != std::string(v).size() || n < 1) throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw ConfigError(std::string("QPROC_WORKERS must be a positive integer, got '") + v + "'");
  }
}

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> samples;
  std::string out;
};

int run(const std::string& experiment, const Options& opt) {
  ExperimentConfig cfg = default_config(experiment);
  if (!opt.config.empty()) {
    std::ifstream in(opt.config);
    if (!in) throw ConfigError("cannot open config file '" + opt.config + "'");
    cfg = parse_config(in, cfg);
    if (cfg.experiment != experiment)
      throw ConfigError("config names experiment '" + cfg.experiment + "' but the subcommand is '" + experiment +
                        "'");
  }
  if (opt.seed) cfg.master_seed = *opt.seed;
  if (opt.samples) {
    if (*opt.samples < 1) throw ConfigError("--samples must be >= 1");
    cfg.samples = *opt.samples;
  }
  if (opt.workers) {
    cfg.workers = *opt.workers;
    cfg.worker_source = WorkerSource::flag;
  } else if (const char* env = std::getenv("QPROC_WORKERS"); env && *env) {
    cfg.workers = parse_env_workers(env);
    cfg.worker_source = WorkerSource::env;
  }
  if (!opt.out.empty()) cfg.output_path = opt.out;
  validate(cfg);

  const auto start = std::chrono::steady_clock::now();
  const Table table = run_experiment(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (cfg.output_path.empty()) {
    std::cout << table.to_csv();
  } else {
    std::ofstream csv(cfg.output_path, std::ios::binary);
    std::ofstream json(cfg.output_path + ".json", std::ios::binary);
    if (!csv || !json) throw ConfigError("cannot write '" + cfg.output_path + "'");
    csv << table.to_csv();
    json << sidecar_json(cfg, table, wall);
  }
  if (table.refusals) std::cerr << table.refusals << " grid point(s) refused\n";
  if (table.violations) {
    std::cerr << table.violations << " bound violation(s)\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seeded experiment sweeps for random quantum processes"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Options opt;
  std::string chosen;
  for (const auto& name : experiment_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config, "key=value config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "master seed");
    sub->add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--samples", opt.samples, "samples per grid point")->check(CLI::PositiveNumber);
    sub->add_option("--out", opt.out, "CSV path; a PATH.json sidecar is written next to it");
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    return run(chosen, opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
