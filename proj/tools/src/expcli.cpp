#include "qproc/expcli.hpp"

#include "qproc/designs.hpp"
#include "qproc/haar.hpp"
#include "qproc/nonmarkov.hpp"
#include "qproc/weingarten.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

namespace qproc::expcli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + v + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(out)) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

std::string fmt_int(std::uint64_t v) { return std::to_string(v); }

std::size_t default_samples(std::size_t k) { return k == 0 ? 40 : 40 / k; }

std::string point_name(const std::string& experiment, std::size_t index) {
  return experiment + "/" + std::to_string(index);
}

ComplexMatrix gue(std::size_t d, RngStream& rng) {
  const ComplexMatrix g = ginibre(d, rng);
  return 0.5 * (g + g.adjoint());
}

ComplexVector random_pure(std::size_t d, RngStream& rng) {
  ComplexVector v(static_cast<Eigen::Index>(d));
  for (auto& z : v) z = rng.complex_normal();
  return v.normalized();
}

}  // namespace

std::string to_string(WorkerSource s) {
  switch (s) {
    case WorkerSource::flag:
      return "flag";
    case WorkerSource::env:
      return "env";
    case WorkerSource::config:
      return "config";
    case WorkerSource::fallback:
      return "default";
  }
  return "default";
}

std::vector<std::string> experiment_names() {
  return {"nonmarkov-sweep", "design-bound", "depth-sweep", "equilibration-demo", "weingarten-dump"};
}

ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == "nonmarkov-sweep") {
    c.k = {1, 2, 3};
    c.dE = {4, 8, 16, 32, 64, 128};
  } else if (experiment == "design-bound") {
    c.k = {2};
    c.t = {2, 4, 6, 8, 10};
    c.log2_dE = {35, 40, 45, 50, 55, 60};
  } else if (experiment == "depth-sweep") {
    c.k = {2};
    c.t = {2, 3, 4, 5, 6, 7, 8, 9, 10};
    c.n_E = {35, 40, 45, 50, 55, 60};
  } else if (experiment == "equilibration-demo") {
    c.k = {0, 1, 2};
    c.dE = {4, 8};
    c.dGamma = {1, 2};
    c.T_mult = {1, 10, 100, 1000, 10000};
  } else if (experiment == "weingarten-dump") {
    c.n = {1, 2, 3, 4, 5};
    c.d = {2, 3, 4, 8};
  } else {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  return c;
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::map<std::string, std::vector<std::string>> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    kv[trim(s.substr(0, eq))].push_back(trim(s.substr(eq + 1)));
  }
  if (auto it = kv.find("experiment"); it != kv.end()) {
    if (it->second.back() != base.experiment) {
      ExperimentConfig fresh = default_config(it->second.back());
      fresh.master_seed = base.master_seed;
      base = std::move(fresh);
    }
  }
  auto single = [&](const std::string& key) -> const std::string& {
    const auto& v = kv.at(key);
    if (v.size() != 1) throw ConfigError("key '" + key + "' given more than once");
    return v.front();
  };
  auto sizes = [&](const std::string& key) {
    std::vector<std::size_t> out;
    for (const auto& v : kv.at(key)) out.push_back(static_cast<std::size_t>(parse_u64(key, v)));
    return out;
  };
  auto reals = [&](const std::string& key) {
    std::vector<double> out;
    for (const auto& v : kv.at(key)) out.push_back(parse_double(key, v));
    return out;
  };
  for (const auto& [key, values] : kv) {
    if (key == "experiment") continue;
    if (key == "dS") base.dS = static_cast<std::size_t>(parse_u64(key, single(key)));
    else if (key == "dE") base.dE = sizes(key);
    else if (key == "k") base.k = sizes(key);
    else if (key == "t") base.t = sizes(key);
    else if (key == "log2_dE") base.log2_dE = reals(key);
    else if (key == "n_E") base.n_E = sizes(key);
    else if (key == "dGamma") base.dGamma = sizes(key);
    else if (key == "T_mult") base.T_mult = reals(key);
    else if (key == "n") base.n = sizes(key);
    else if (key == "d") base.d = sizes(key);
    else if (key == "delta") base.delta = parse_double(key, single(key));
    else if (key == "eps") base.eps = parse_double(key, single(key));
    else if (key == "target") base.target = parse_double(key, single(key));
    else if (key == "samples") base.samples = static_cast<std::size_t>(parse_u64(key, single(key)));
    else if (key == "setups") base.setups = static_cast<std::size_t>(parse_u64(key, single(key)));
    else if (key == "master_seed") base.master_seed = parse_u64(key, single(key));
    else if (key == "output_path") base.output_path = single(key);
    else if (key == "workers") {
      base.workers = static_cast<std::size_t>(parse_u64(key, single(key)));
      base.worker_source = WorkerSource::config;
    } else if (key == "interaction") {
      try {
        base.interaction = interaction_from_string(single(key));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
    base.echo[key] = values;
  }
  return base;
}

void validate(const ExperimentConfig& c) {
  auto nonempty = [](const auto& v, const char* name) {
    if (v.empty()) throw ConfigError(std::string("grid '") + name + "' is empty");
  };
  if (c.workers < 1) throw ConfigError("workers must be >= 1");
  if (c.dS < 1) throw ConfigError("dS must be >= 1");
  const auto& e = c.experiment;
  if (e == "nonmarkov-sweep") {
    nonempty(c.k, "k");
    nonempty(c.dE, "dE");
    for (auto v : c.dE)
      if (v < 1) throw ConfigError("dE must be >= 1");
  } else if (e == "design-bound") {
    nonempty(c.k, "k");
    nonempty(c.t, "t");
    nonempty(c.log2_dE, "log2_dE");
    if (c.dS < 2) throw ConfigError("design bounds need dS >= 2");
  } else if (e == "depth-sweep") {
    nonempty(c.t, "t");
    nonempty(c.n_E, "n_E");
    if (c.dS < 2) throw ConfigError("design bounds need dS >= 2");
    if (!(c.eps > 0.0) || c.eps > 1.0) throw ConfigError("eps must lie in (0, 1] for the depth sweep");
  } else if (e == "equilibration-demo") {
    nonempty(c.k, "k");
    nonempty(c.dE, "dE");
    nonempty(c.dGamma, "dGamma");
    nonempty(c.T_mult, "T_mult");
    if (c.setups < 1) throw ConfigError("setups must be >= 1");
  } else if (e == "weingarten-dump") {
    nonempty(c.n, "n");
    nonempty(c.d, "d");
  } else {
    throw ConfigError("unknown experiment '" + e + "'");
  }
  for (auto v : c.t)
    if (v < 1) throw ConfigError("t must be >= 1");
  if (!(c.delta > 0.0)) throw ConfigError("delta must be positive");
  if (!(c.eps >= 0.0)) throw ConfigError("eps must be non-negative");
}

// ---------------------------------------------------------------- output

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const double a = std::abs(v);
  if (v != 0.0 && (a < 1e-4 || a >= 1e6))
    std::snprintf(buf, sizeof buf, "%.12e", v);
  else
    std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string Table::to_csv() const {
  std::string out;
  auto join = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  join(header);
  for (const auto& r : rows) join(r);
  return out;
}

std::string sidecar_json(const ExperimentConfig& cfg, const Table& table, double wall_time_seconds) {
  nlohmann::ordered_json j;
  j["experiment"] = cfg.experiment;
  j["code_version"] = kVersion;
  j["master_seed"] = cfg.master_seed;
  j["workers"] = cfg.workers;
  j["workers_source"] = to_string(cfg.worker_source);
  j["config"] = cfg.echo;
  j["fiducial"] = "|0> on E (x) S";
  j["rows"] = table.rows.size();
  j["violations"] = table.violations;
  j["refusals"] = table.refusals;
  j["wall_time_seconds"] = wall_time_seconds;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- sweeps

std::vector<NonMarkovPoint> nonmarkov_points(const ExperimentConfig& cfg) {
  struct Job {
    std::size_t point, trial;
  };
  std::vector<NonMarkovPoint> points;
  std::vector<Job> jobs;
  for (auto k : cfg.k)
    for (auto dE : cfg.dE) {
      NonMarkovPoint p;
      p.dE = dE;
      p.k = k;
      p.samples = cfg.samples ? cfg.samples : default_samples(k);
      const double length = static_cast<double>(dE) * std::pow(static_cast<double>(cfg.dS), 2.0 * k + 1.0);
      p.refused = length > static_cast<double>(kDefaultVectorCap);
      if (!p.refused) {
        try {
          p.bound = bound_Bk(BoundParams{cfg.dS, dE, k, cfg.interaction}).value;
        } catch (const UnsupportedRegime&) {
          p.refused = true;
        }
      }
      if (!p.refused)
        for (std::size_t i = 0; i < p.samples; ++i) jobs.push_back({points.size(), i});
      points.push_back(p);
    }
  const auto values = parallel_map(jobs.size(), cfg.workers, [&](std::size_t j) {
    const auto& job = jobs[j];
    const auto& p = points[job.point];
    ProcessConfig pc;
    pc.dS = cfg.dS;
    pc.dE = p.dE;
    pc.k = p.k;
    pc.interaction = cfg.interaction;
    RngStream rng(cfg.master_seed, stream_id(point_name(cfg.experiment, job.point), job.trial));
    return n1_maxmixed(sample_process(pc, rng));
  });
  std::vector<std::vector<double>> per_point(points.size());
  for (std::size_t j = 0; j < jobs.size(); ++j) per_point[jobs[j].point].push_back(values[j]);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].refused) continue;
    const auto est = mean_and_stderr(per_point[i]);
    points[i].mean = est.mean;
    points[i].sd = est.std_error * std::sqrt(static_cast<double>(est.n));
  }
  return points;
}

Table run_nonmarkov_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  Table t;
  t.header = {"dS", "dE", "k", "interaction", "samples", "master_seed", "mean_n1", "sd_n1", "bound_Bk",
              "status", "reason"};
  for (const auto& p : nonmarkov_points(cfg)) {
    std::vector<std::string> row{fmt_int(cfg.dS), fmt_int(p.dE), fmt_int(p.k), to_string(cfg.interaction),
                                 fmt_int(p.samples), fmt_int(cfg.master_seed)};
    if (p.refused) {
      ++t.refusals;
      row.insert(row.end(), {"", "", "", "refused", "exceeds memory guard or unsupported average"});
    } else {
      const bool ok = p.mean <= p.bound;
      if (!ok) ++t.violations;
      row.insert(row.end(), {format_number(p.mean), format_number(p.sd), format_number(p.bound),
                             ok ? "ok" : "violation", ok ? "" : "mean exceeds bound"});
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table run_design_bound_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  Table t;
  t.header = {"dS", "k", "t", "log2_dE", "delta", "eps", "m_star", "log10_bound", "status", "reason"};
  for (auto k : cfg.k)
    for (auto order : cfg.t)
      for (auto lg : cfg.log2_dE) {
        LdbParams p;
        p.dS = cfg.dS;
        p.dE = std::exp2(lg);
        p.k = k;
        p.delta = cfg.delta;
        const auto opt = optimize_m(p, DesignSpec{order, cfg.eps});
        t.rows.push_back({fmt_int(cfg.dS), fmt_int(k), fmt_int(order), format_number(lg), format_number(cfg.delta),
                          format_number(cfg.eps), format_number(opt.m),
                          format_number(opt.log_bound / std::log(10.0)), "ok", ""});
      }
  return t;
}

Table run_depth_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::size_t k = cfg.k.empty() ? 2 : cfg.k.front();
  Table t;
  t.header = {"t", "n_E", "n", "eps", "min_log2_dE", "bound_at_n_E", "depth", "status", "reason"};
  for (auto order : cfg.t) {
    // Smallest integer log2 dE whose optimized bound meets the target.
    const DesignSpec spec{order, cfg.eps};
    auto bound_at = [&](double lg) {
      LdbParams p;
      p.dS = cfg.dS;
      p.dE = std::exp2(lg);
      p.k = k;
      p.delta = cfg.delta;
      return optimize_m(p, spec).bound;
    };
    std::optional<int> min_lg;
    for (int lg = 1; lg <= 1000 && !min_lg; ++lg)
      if (bound_at(lg) <= cfg.target) min_lg = lg;
    for (auto ne : cfg.n_E) {
      const double depth = required_depth(order, cfg.eps, ne + 1);
      t.rows.push_back({fmt_int(order), fmt_int(ne), fmt_int(ne + 1), format_number(cfg.eps),
                        min_lg ? std::to_string(*min_lg) : "", format_number(bound_at(static_cast<double>(ne))),
                        format_number(depth), min_lg ? "ok" : "refused",
                        min_lg ? "" : "target not met for log2 dE <= 1000"});
      if (!min_lg) ++t.refusals;
    }
  }
  return t;
}

MultitimeSetup random_multitime_setup(std::size_t dS, std::size_t dE, std::size_t dGamma, std::size_t k,
                                      RngStream& rng) {
  MultitimeSetup s;
  s.dS = dS;
  s.hamiltonians.push_back(Hamiltonian::from_matrix(gue(dS * dE, rng)));
  const std::size_t d = dS * dGamma;
  const std::size_t rank = std::max<std::size_t>(1, d / 2);
  for (std::size_t i = 0; i <= k; ++i) {
    const ComplexMatrix u = haar_unitary(d, rng).matrix();
    const ComplexMatrix v = haar_unitary(d, rng).matrix();
    ComplexMatrix p = ComplexMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < rank; ++j) p(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = 1.0;
    s.ops.emplace_back(std::vector<ComplexMatrix>{v * p * v.adjoint() * u});
  }
  s.rho = DensityMatrix::from_pure(PureState(random_pure(dS * dE, rng)));
  s.gamma = DensityMatrix::from_pure(PureState(random_pure(dGamma, rng)));
  return s;
}

Table run_equilibration_demo(const ExperimentConfig& cfg) {
  validate(cfg);
  struct SetupRows {
    std::vector<std::vector<std::string>> rows;
    std::size_t violations = 0, refusals = 0;
  };
  const auto per_setup = parallel_map(cfg.setups, cfg.workers, [&](std::size_t s) {
    RngStream rng(cfg.master_seed, stream_id(point_name(cfg.experiment, s), 0));
    const std::size_t dE = cfg.dE[rng.uniform_index(cfg.dE.size())];
    const std::size_t dG = cfg.dGamma[rng.uniform_index(cfg.dGamma.size())];
    const std::size_t k = cfg.k[rng.uniform_index(cfg.k.size())];
    SetupRows out;
    std::vector<std::string> head{fmt_int(s), fmt_int(cfg.dS), fmt_int(dE), fmt_int(dG), fmt_int(k)};
    if (cfg.dS * dE * dG > kMaxMultitimeDim) {
      auto row = head;
      row.insert(row.end(), {"", "", "", "", "", "", "", "refused", "dS*dE*dGamma exceeds 64"});
      out.rows.push_back(std::move(row));
      ++out.refusals;
      return out;
    }
    const auto setup = random_multitime_setup(cfg.dS, dE, dG, k, rng);
    const double gap = setup.hamiltonians[0].min_gap();
    for (double mult : cfg.T_mult) {
      const auto clock = FuzzyClock::uniform(mult / gap);
      const double lhs = multitime_lhs(setup, clock);
      const auto b = multitime_bound(setup, clock);
      double sb = 0.0, sc = 0.0;
      for (double x : b.b) sb += x;
      for (double x : b.c) sc += x;
      const bool ok = lhs <= b.total;
      if (!ok) ++out.violations;
      auto row = head;
      row.insert(row.end(), {format_number(mult), format_number(clock.T()), format_number(lhs),
                             format_number(b.a_k), format_number(sb), format_number(sc), format_number(b.total),
                             ok ? "ok" : "violation", ok ? "" : "lhs exceeds bound"});
      out.rows.push_back(std::move(row));
    }
    return out;
  });
  Table t;
  t.header = {"setup", "dS", "dE", "dGamma", "k", "T_mult", "T", "lhs", "A_k", "sum_B", "sum_C", "total",
              "status", "reason"};
  for (const auto& s : per_setup) {
    t.rows.insert(t.rows.end(), s.rows.begin(), s.rows.end());
    t.violations += s.violations;
    t.refusals += s.refusals;
  }
  return t;
}

Table run_weingarten_dump(const ExperimentConfig& cfg) {
  validate(cfg);
  Table t;
  t.header = {"n", "d", "cycle_type", "value", "residual", "status", "reason"};
  for (auto n : cfg.n)
    for (auto d : cfg.d) {
      try {
        const auto table = weingarten_table(n, d);
        char res[32];
        std::snprintf(res, sizeof res, "%.3e", table.row_residual());
        for (const auto& [ct, v] : table.by_cycle_type()) {
          char val[40];
          std::snprintf(val, sizeof val, "%.17g", v);
          t.rows.push_back({fmt_int(n), fmt_int(d), ct.str(), val, res, "ok", ""});
        }
      } catch (const UnsupportedRegime& e) {
        ++t.refusals;
        t.rows.push_back({fmt_int(n), fmt_int(d), "", "", "", "refused", e.what()});
      }
    }
  return t;
}

Table run_experiment(const ExperimentConfig& cfg) {
  const auto& e = cfg.experiment;
  if (e == "nonmarkov-sweep") return run_nonmarkov_sweep(cfg);
  if (e == "design-bound") return run_design_bound_sweep(cfg);
  if (e == "depth-sweep") return run_depth_sweep(cfg);
  if (e == "equilibration-demo") return run_equilibration_demo(cfg);
  if (e == "weingarten-dump") return run_weingarten_dump(cfg);
  throw ConfigError("unknown experiment '" + e + "'");
}

}  // namespace qproc::expcli
