#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "zomd/estimators.hpp"
#include "zomd/oracle.hpp"
#include "zomd/parallel.hpp"
#include "zomd/problems.hpp"
#include "zomd/solver.hpp"
#include "zomd/stats.hpp"

namespace zomd {

/// Stream id reserved for building the fixture; replication k uses
/// RngStream(seed + k, kRunStream).
inline constexpr std::uint64_t kFixtureStream = 0;
inline constexpr std::uint64_t kRunStream = 1;

/// Parses a CLI estimator name into a config (mu and tau filled later).
/// rademacher / coordinate / gaussian are zeroth-order finite differences
/// when tau > 0 and exact Z-scheme draws otherwise.
inline EstimatorConfig parse_estimator(std::string_view name, double tau = 0.0) {
  EstimatorConfig c;
  c.tau = tau;
  auto z_family = [&](ZKind kind) {
    c.family = tau > 0.0 ? EstimatorFamily::ZFiniteDiff : EstimatorFamily::ZScheme;
    c.z_kind = kind;
  };
  if (name == "p1") {
    c.scheme = DirectionScheme::L1Sphere;
  } else if (name == "p2") {
    c.scheme = DirectionScheme::L2Sphere;
  } else if (name == "pinf") {
    c.scheme = DirectionScheme::LInfSphere;
  } else if (name == "pinf-cube") {
    c.scheme = DirectionScheme::LInfBall;
  } else if (name == "directional-p1") {
    c.family = EstimatorFamily::DirectionalExact;
    c.scheme = DirectionScheme::L1Sphere;
  } else if (name == "directional-p2") {
    c.family = EstimatorFamily::DirectionalExact;
    c.scheme = DirectionScheme::L2Sphere;
  } else if (name == "directional-pinf") {
    c.family = EstimatorFamily::DirectionalExact;
    c.scheme = DirectionScheme::LInfSphere;
  } else if (name == "rademacher") {
    z_family(ZKind::Rademacher);
  } else if (name == "coordinate") {
    z_family(ZKind::Coordinate);
  } else if (name == "gaussian") {
    z_family(ZKind::ScaledGaussian);
  } else if (name == "exact") {
    c.family = EstimatorFamily::ExactSubgradient;
  } else {
    throw std::invalid_argument("unknown estimator '" + std::string(name) + "'");
  }
  return c;
}

/// Everything that determines one experiment's output.
struct ExperimentSpec {
  std::string label;
  ProblemKind problem = ProblemKind::NonsmoothDistL1;
  std::size_t n = 5;
  double noise_radius = kDefaultNoiseRadius;
  std::string estimator = "p1";
  NoiseKind noise = NoiseKind::None;
  /// NaN selects the schedule's admissible delta_max (0 when there is none)
  double delta = 0.0;
  int bits = 16;
  Schedule schedule = Schedule::Theorem2;
  double eps = 0.3;
  std::optional<double> sigma;
  /// 0 selects the schedule's N
  std::int64_t iterations = 0;
  /// 0 selects the schedule's mu
  double mu = 0.0;
  double tau = 0.0;
  /// step constant for the manual schedule (0 selects M2)
  double beta = 0.0;
  int reps = 50;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  /// when false the seconds column is written as 0 so output is byte-stable
  bool timing = false;
};

/// One line of the results table.
struct ResultRow {
  std::string experiment;
  std::size_t n = 0;
  std::string scheme;
  double delta = 0.0;
  std::int64_t iterations = 0;
  double gap_mean = 0.0;
  double gap_se = 0.0;
  double bound = std::numeric_limits<double>::quiet_NaN();
  bool bound_ok = false;
  std::int64_t oracle_calls = 0;
  double seconds = 0.0;
};

/// A spec resolved into a concrete fixture, channel and run configuration.
struct ResolvedExperiment {
  StochasticProblem problem;
  NoiseChannel channel;
  RunConfig config;
  double bound = std::numeric_limits<double>::quiet_NaN();
  std::string id;
};

inline std::string default_experiment_id(const ExperimentSpec& spec) {
  return fmt::format("{}-{}-{}-n{:04d}", to_string(spec.schedule), to_string(spec.problem), spec.estimator, spec.n);
}

inline ResolvedExperiment resolve(const ExperimentSpec& spec) {
  RngStream fixture_rng(spec.seed, kFixtureStream);
  StochasticProblem problem = make_problem(spec.problem, spec.n, fixture_rng, spec.noise_radius);
  const ProblemConstants& k = problem.constants();

  RunConfig config;
  config.estimator = parse_estimator(spec.estimator, spec.tau);
  double bound = std::numeric_limits<double>::quiet_NaN();
  double tuned_mu = 0.0;
  std::int64_t tuned_n = 0;

  switch (spec.schedule) {
    case Schedule::Theorem1: {
      const Tuning t = tune_theorem1(k.m1, spec.n, spec.eps);
      config.schedule = t.schedule;
      tuned_n = t.iterations;
      break;
    }
    case Schedule::Theorem2: {
      const Tuning t = tune_theorem2(k.m1, spec.n, spec.eps, spec.sigma, k.mu0);
      config.schedule = t.schedule;
      config.delta_max = t.delta_max;
      tuned_mu = t.mu;
      tuned_n = t.iterations;
      bound = spec.eps;
      break;
    }
    case Schedule::Theorem3: {
      const Tuning t = tune_theorem3(k.m2, k.l2, spec.n, spec.eps, DualNorm::LInf, k.mu0);
      config.schedule = t.schedule;
      config.delta_max = t.delta_max;
      tuned_mu = t.mu;
      tuned_n = t.iterations;
      bound = spec.eps;
      break;
    }
    case Schedule::Manual:
      config.schedule = StepSchedule::manual(spec.beta > 0.0 ? spec.beta : k.m2);
      break;
  }

  config.iterations = spec.iterations > 0 ? spec.iterations : tuned_n;
  if (config.iterations <= 0) throw std::invalid_argument("manual schedule needs an explicit --N");
  config.estimator.mu = spec.mu > 0.0 ? spec.mu : tuned_mu;
  if (config.estimator.family == EstimatorFamily::SmoothedTwoPoint && !(config.estimator.mu > 0.0)) {
    throw std::invalid_argument("two-point estimator needs --mu (no tuning rule for this schedule)");
  }
  if (spec.schedule == Schedule::Theorem1) {
    bound = 2.0 * k.m1 * std::sqrt(std::log(static_cast<double>(spec.n)) / static_cast<double>(config.iterations));
  }

  double delta = spec.delta;
  if (std::isnan(delta)) delta = std::isfinite(config.delta_max) ? config.delta_max : 0.0;
  NoiseChannel channel = NoiseChannel::make(spec.noise, delta, spec.bits);

  return {std::move(problem), channel, config, bound, spec.label.empty() ? default_experiment_id(spec) : spec.label};
}

/// Runs spec.reps replications (seeds seed, seed+1, ...) and aggregates
/// the final optimality gaps into one row.
inline ResultRow run_experiment(const ExperimentSpec& spec) {
  if (spec.reps < 2) throw std::invalid_argument("need at least 2 replications for a standard error");
  const ResolvedExperiment ex = resolve(spec);
  std::vector<RunReport> reports(static_cast<std::size_t>(spec.reps));
  parallel_for(reports.size(), spec.threads, [&](std::size_t r) {
    RngStream rng(spec.seed + r, kRunStream);
    reports[r] = run(ex.problem, ex.channel, ex.config, rng);
  });

  RunningMean gaps;
  double seconds = 0.0;
  for (const RunReport& r : reports) {
    gaps.add(r.final_gap);
    seconds += r.wall_seconds;
  }
  ResultRow row;
  row.experiment = ex.id;
  row.n = spec.n;
  row.scheme = spec.estimator;
  row.delta = ex.channel.delta();
  row.iterations = ex.config.iterations;
  row.gap_mean = gaps.mean();
  row.gap_se = gaps.std_error();
  row.bound = ex.bound;
  row.bound_ok = !std::isnan(ex.bound) && row.gap_mean <= ex.bound;
  row.oracle_calls = reports.front().oracle_calls;
  row.seconds = spec.timing ? seconds : 0.0;
  return row;
}

/// One experiment per dimension in n_list; ids get an -n#### suffix.
inline std::vector<ResultRow> run_sweep(const ExperimentSpec& base, const std::vector<std::size_t>& n_list) {
  std::vector<ResultRow> rows;
  for (std::size_t n : n_list) {
    ExperimentSpec spec = base;
    spec.n = n;
    spec.label = base.label.empty() ? "" : fmt::format("{}-n{:04d}", base.label, n);
    rows.push_back(run_experiment(spec));
  }
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) { return a.experiment < b.experiment; });
  return rows;
}

inline constexpr std::string_view kCsvHeader =
    "experiment,n,scheme,delta,N,gap_mean,gap_se,bound,bound_ok,oracle_calls,seconds";

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{}", v);
}

}  // namespace detail

/// RFC-4180 CSV with LF line endings.
inline void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << '\n';
  for (const ResultRow& r : rows) {
    out << detail::csv_field(r.experiment) << ',' << r.n << ',' << detail::csv_field(r.scheme) << ','
        << detail::csv_number(r.delta) << ',' << r.iterations << ',' << detail::csv_number(r.gap_mean) << ','
        << detail::csv_number(r.gap_se) << ',' << detail::csv_number(r.bound) << ','
        << (r.bound_ok ? "true" : "false") << ',' << r.oracle_calls << ',' << detail::csv_number(r.seconds) << '\n';
  }
}

/// One JSON object per row; NaN becomes null.
inline void write_jsonl(std::ostream& out, const std::vector<ResultRow>& rows) {
  auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  for (const ResultRow& r : rows) {
    nlohmann::ordered_json j;
    j["experiment"] = r.experiment;
    j["n"] = r.n;
    j["scheme"] = r.scheme;
    j["delta"] = num(r.delta);
    j["N"] = r.iterations;
    j["gap_mean"] = num(r.gap_mean);
    j["gap_se"] = num(r.gap_se);
    j["bound"] = num(r.bound);
    j["bound_ok"] = r.bound_ok;
    j["oracle_calls"] = r.oracle_calls;
    j["seconds"] = num(r.seconds);
    out << j.dump() << '\n';
  }
}

enum class OutputFormat { Csv, Jsonl };

inline void write_results(const std::string& path, const std::vector<ResultRow>& rows, OutputFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  if (format == OutputFormat::Csv) {
    write_csv(out, rows);
  } else {
    write_jsonl(out, rows);
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace zomd
