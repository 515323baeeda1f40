// Experiment runner behind the qproc command-line tool.
//
// Config files are flat key=value lines; list parameters repeat their key.
// Every sweep draws trial i of grid point g from the stream
// (master_seed, stream_id("<experiment>/<g>", i)), so results do not depend
// on the worker count.
#pragma once

#include "qproc/equilibration.hpp"
#include "qproc/process.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qproc::expcli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kVersion = "0.1.0";

enum class WorkerSource { flag, env, config, fallback };
std::string to_string(WorkerSource s);

struct ExperimentConfig {
  std::string experiment;
  std::size_t dS = 2;
  std::vector<std::size_t> dE;
  std::vector<std::size_t> k;
  std::vector<std::size_t> t;
  std::vector<double> log2_dE;
  std::vector<std::size_t> n_E;
  std::vector<std::size_t> dGamma;
  std::vector<double> T_mult;
  std::vector<std::size_t> n;
  std::vector<std::size_t> d;
  double delta = 0.1;
  double eps = 1e-12;
  double target = 0.01;
  /// Overrides the per-point sample count when nonzero.
  std::size_t samples = 0;
  std::size_t setups = 20;
  Interaction interaction = Interaction::random;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
  WorkerSource worker_source = WorkerSource::fallback;
  std::string output_path;

  /// Keys exactly as read, for the sidecar echo.
  std::map<std::string, std::vector<std::string>> echo;
};

std::vector<std::string> experiment_names();

/// Defaults for the named experiment; ConfigError if unknown.
ExperimentConfig default_config(const std::string& experiment);
/// Applies key=value lines on top of `base`. Grid keys given in the file
/// replace the defaults.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base);
/// Checks grids and counts; ConfigError on failure.
void validate(const ExperimentConfig& cfg);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t violations = 0;
  std::size_t refusals = 0;

  std::string to_csv() const;
};

/// Scientific notation for 0 < |v| < 1e-4 or |v| >= 1e6, otherwise %.12g.
std::string format_number(double v);

Table run_nonmarkov_sweep(const ExperimentConfig& cfg);
Table run_design_bound_sweep(const ExperimentConfig& cfg);
Table run_depth_sweep(const ExperimentConfig& cfg);
Table run_equilibration_demo(const ExperimentConfig& cfg);
Table run_weingarten_dump(const ExperimentConfig& cfg);
Table run_experiment(const ExperimentConfig& cfg);

/// JSON sidecar: config echo, seed, workers and their source, version and wall time.
std::string sidecar_json(const ExperimentConfig& cfg, const Table& table, double wall_time_seconds);

/// Random multitime setup: GUE Hamiltonian on S (x) E, Haar pure states, and
/// operations K = V P V^dagger U with P a projector of rank max(1, d/2).
MultitimeSetup random_multitime_setup(std::size_t dS, std::size_t dE, std::size_t dGamma, std::size_t k,
                                      RngStream& rng);

/// Summary of one grid point of the non-Markovianity sweep.
struct NonMarkovPoint {
  std::size_t dE = 0, k = 0, samples = 0;
  double mean = 0.0, sd = 0.0, bound = 0.0;
  bool refused = false;
};
std::vector<NonMarkovPoint> nonmarkov_points(const ExperimentConfig& cfg);

}  // namespace qproc::expcli
