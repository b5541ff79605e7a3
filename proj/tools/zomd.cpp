// zomd: command-line runner for gradient-free mirror descent experiments.
//
//   zomd run    --problem distl1 --n 5 --schedule thm2 --eps 0.3 --noise sign --delta auto
//   zomd sweep  --problem quad --n-list 8,32 --estimator directional-p2 --schedule manual --N 2000
//   zomd verify --suite unbiasedness --n-list 2,4,8
#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "zomd/zomd.hpp"

namespace {

struct RunOptions {
  std::string problem = "distl1";
  std::size_t n = 5;
  double noise_radius = zomd::kDefaultNoiseRadius;
  std::string estimator = "p1";
  std::string noise = "none";
  std::string delta = "0";
  int bits = 16;
  std::string schedule = "thm2";
  double eps = 0.3;
  double sigma = 0.0;
  std::string iterations = "auto";
  std::string mu = "auto";
  double tau = 0.0;
  double beta = 0.0;
  int reps = 50;
  std::uint64_t seed = 1;
  unsigned threads = zomd::default_thread_count();
  bool timing = false;
  std::string out;
  std::string format = "csv";
  std::vector<std::size_t> n_list{8, 32};
};

double parse_real_or_auto(const std::string& s, double auto_value) {
  if (s == "auto") return auto_value;
  return std::stod(s);
}

zomd::ExperimentSpec to_spec(const RunOptions& o) {
  zomd::ExperimentSpec spec;
  spec.problem = zomd::parse_problem_kind(o.problem);
  spec.n = o.n;
  spec.noise_radius = o.noise_radius;
  spec.estimator = o.estimator;
  spec.noise = zomd::parse_noise_kind(o.noise);
  spec.delta = parse_real_or_auto(o.delta, std::numeric_limits<double>::quiet_NaN());
  spec.bits = o.bits;
  spec.schedule = zomd::parse_schedule(o.schedule);
  spec.eps = o.eps;
  if (o.sigma > 0.0) spec.sigma = o.sigma;
  spec.iterations = o.iterations == "auto" ? 0 : std::stoll(o.iterations);
  spec.mu = parse_real_or_auto(o.mu, 0.0);
  spec.tau = o.tau;
  spec.beta = o.beta;
  spec.reps = o.reps;
  spec.seed = o.seed;
  spec.threads = o.threads;
  spec.timing = o.timing;
  // validate the estimator name early
  zomd::parse_estimator(spec.estimator, spec.tau);
  return spec;
}

void emit(const std::vector<zomd::ResultRow>& rows, const RunOptions& o) {
  const auto format = o.format == "jsonl" ? zomd::OutputFormat::Jsonl : zomd::OutputFormat::Csv;
  if (o.out.empty()) {
    if (format == zomd::OutputFormat::Csv) {
      zomd::write_csv(std::cout, rows);
    } else {
      zomd::write_jsonl(std::cout, rows);
    }
  } else {
    zomd::write_results(o.out, rows, format);
  }
}

void add_experiment_flags(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--problem", o.problem, "Fixture: linear|distl1|quad|maxlin")
      ->check(CLI::IsMember({"linear", "distl1", "quad", "maxlin"}));
  cmd->add_option("--noise-radius", o.noise_radius, "Half-width r of the realisation noise eta");
  cmd->add_option("--estimator", o.estimator,
                  "p1|p2|pinf|pinf-cube|rademacher|coordinate|gaussian|directional-p1|directional-p2|"
                  "directional-pinf|exact");
  cmd->add_option("--noise", o.noise, "Oracle noise channel: none|uniform|sign|mantissa")
      ->check(CLI::IsMember({"none", "uniform", "sign", "mantissa"}));
  cmd->add_option("--delta", o.delta, "Noise level, or 'auto' for the schedule's delta_max");
  cmd->add_option("--bits", o.bits, "Fractional bits kept by the mantissa channel");
  cmd->add_option("--schedule", o.schedule, "thm1|thm2|thm3|manual")
      ->check(CLI::IsMember({"thm1", "thm2", "thm3", "manual"}));
  cmd->add_option("--eps", o.eps, "Target accuracy");
  cmd->add_option("--sigma", o.sigma, "Failure probability for the high-probability N (thm2)");
  cmd->add_option("--N", o.iterations, "Iterations, or 'auto'");
  cmd->add_option("--mu", o.mu, "Smoothing radius, or 'auto'");
  cmd->add_option("--tau", o.tau, "Finite-difference step for Z-scheme estimators (0 = exact)");
  cmd->add_option("--beta", o.beta, "Step constant for the manual schedule (default M2)");
  cmd->add_option("--reps", o.reps, "Replications (seeds seed, seed+1, ...)")->check(CLI::Range(2, 1000000));
  cmd->add_option("--seed", o.seed, "Base seed");
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1u, 4096u));
  cmd->add_flag("--timing", o.timing, "Record wall time in the seconds column (breaks byte-identical output)");
  cmd->add_option("--out", o.out, "Output path (stdout when omitted)");
  cmd->add_option("--format", o.format, "csv|jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-free mirror descent on the simplex: experiments and Monte-Carlo checks"};
  app.require_subcommand(1);
  // one file can configure every subcommand through [run], [sweep] and [verify] sections
  app.set_config("--config", "", "INI/TOML configuration file; command-line flags override it");

  RunOptions run_opts;
  CLI::App* run_cmd = app.add_subcommand("run", "Run one replicated experiment and write a results row");
  add_experiment_flags(run_cmd, run_opts);
  run_cmd->add_option("--n", run_opts.n, "Dimension")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));

  RunOptions sweep_opts;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run one experiment per dimension in --n-list");
  add_experiment_flags(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--n-list", sweep_opts.n_list, "Dimensions")->delimiter(',');

  std::string suite = "unbiasedness";
  zomd::VerifyOptions verify_opts;
  verify_opts.n_list = {2, 4, 8};
  std::string verify_out;
  CLI::App* verify_cmd = app.add_subcommand("verify", "Run a Monte-Carlo verification suite");
  verify_cmd->add_option("--suite", suite, "unbiasedness|variance|volume|moments")
      ->check(CLI::IsMember({"unbiasedness", "variance", "volume", "moments"}));
  verify_cmd->add_option("--n-list", verify_opts.n_list, "Dimensions")->delimiter(',');
  verify_cmd->add_option("--seed", verify_opts.seed, "Seed");
  verify_cmd->add_option("--draws", verify_opts.draws, "Monte-Carlo draws per check");
  verify_cmd->add_option("--out", verify_out, "Write the report here as well as stdout");

  for (CLI::App* sub : {run_cmd, sweep_cmd, verify_cmd}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const zomd::ExperimentSpec spec = to_spec(run_opts);
      const zomd::ResolvedExperiment resolved = zomd::resolve(spec);
      if (resolved.channel.delta() > resolved.config.delta_max) {
        std::cerr << fmt::format("warning: delta={} exceeds delta_max={} for {}\n", resolved.channel.delta(),
                                 resolved.config.delta_max, zomd::to_string(spec.schedule));
      }
      emit({zomd::run_experiment(spec)}, run_opts);
      return 0;
    }
    if (sweep_cmd->parsed()) {
      emit(zomd::run_sweep(to_spec(sweep_opts), sweep_opts.n_list), sweep_opts);
      return 0;
    }
    if (verify_cmd->parsed()) {
      const auto checks = zomd::verify_suite(zomd::parse_verify_suite(suite), verify_opts);
      zomd::print_checks(std::cout, checks);
      if (!verify_out.empty()) {
        std::ofstream f(verify_out);
        if (!f) throw std::runtime_error("cannot open '" + verify_out + "'");
        zomd::print_checks(f, checks);
      }
      bool all = true;
      for (const auto& c : checks) all = all && c.pass;
      return all ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "zomd: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
