// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.
//
//   zomd_acceptance --cli build/tools/zomd --workdir build/tests [--only 3,9]
#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "zomd/zomd.hpp"

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double time_limit;  // seconds; 0 = none
  std::function<Outcome()> check;
};

unsigned threads() { return zomd::default_thread_count(); }

// 1. exact stochastic subgradient, mean gap <= 2M sqrt(ln n / N)
Outcome exact_rate() {
  Outcome out{true, ""};
  for (zomd::ProblemKind kind : {zomd::ProblemKind::LinearNoisy, zomd::ProblemKind::NonsmoothDistL1}) {
    for (std::int64_t n_iter : {1000, 10000, 100000}) {
      zomd::ExperimentSpec spec;
      spec.problem = kind;
      spec.n = 10;
      spec.estimator = "exact";
      spec.schedule = zomd::Schedule::Theorem1;
      spec.iterations = n_iter;
      spec.reps = 50;
      spec.threads = threads();
      const zomd::ResultRow row = zomd::run_experiment(spec);
      out.pass = out.pass && row.bound_ok;
      out.detail += fmt::format("{} N={}: {:.4g}<={:.4g}; ", zomd::to_string(kind), n_iter, row.gap_mean, row.bound);
    }
  }
  return out;
}

zomd::ResultRow tuned_run(zomd::ProblemKind kind, std::size_t n, double eps, zomd::Schedule schedule,
                          const std::string& estimator) {
  zomd::ExperimentSpec spec;
  spec.problem = kind;
  spec.n = n;
  spec.eps = eps;
  spec.schedule = schedule;
  spec.estimator = estimator;
  spec.noise = zomd::NoiseKind::RandomSign;
  spec.delta = std::nan("");  // the schedule's admissible level
  spec.reps = 50;
  spec.threads = threads();
  return zomd::run_experiment(spec);
}

std::string describe(const zomd::ResultRow& row) {
  return fmt::format("N={} delta={:.4g} gap={:.4g} (se {:.2g}) <= eps={}", row.iterations, row.delta, row.gap_mean,
                     row.gap_se, row.bound);
}

// 2. nonsmooth tuned run, l1 directions, sign noise at eps/4
Outcome nonsmooth_end_to_end() {
  const zomd::ResultRow row = tuned_run(zomd::ProblemKind::NonsmoothDistL1, 5, 0.3, zomd::Schedule::Theorem2, "p1");
  return {row.bound_ok, describe(row)};
}

// 3. smooth tuned run, l2 directions, sign noise at delta_max
Outcome smooth_end_to_end() {
  const zomd::ResultRow row = tuned_run(zomd::ProblemKind::SmoothQuadratic, 20, 0.15, zomd::Schedule::Theorem3, "p2");
  return {row.bound_ok, describe(row)};
}

std::string summarize(const std::vector<zomd::CheckResult>& checks, bool* all) {
  *all = !checks.empty();
  int failed = 0;
  double worst = 0.0;
  for (const auto& c : checks) {
    *all = *all && c.pass;
    failed += !c.pass;
    worst = std::max(worst, c.measured / c.threshold);
  }
  return fmt::format("{} checks, {} failed, worst measured/threshold {:.3f}", checks.size(), failed, worst);
}

// 4. MC mean of g matches finite-difference grad f^mu within 4 SE
Outcome unbiasedness() {
  zomd::VerifyOptions opt;
  opt.n_list = {2, 4, 8};
  opt.draws = 1000000;
  bool all = false;
  const auto checks = zomd::verify_unbiasedness(opt);
  std::string detail = summarize(checks, &all);
  for (const auto& c : checks) {
    if (!c.pass) detail += "; failed: " + c.name;
  }
  return {all, detail};
}

// 5. ||g||_inf <= (M + 2 delta / mu) n for every l1-sphere draw
Outcome l1_hard_bound() {
  const double m = 1.0, mu = 0.1, delta = 0.05;
  zomd::RngStream rng(5, 50);
  std::vector<zomd::StochasticProblem> fixtures;
  fixtures.push_back(zomd::StochasticProblem::dist_l1(zomd::random_simplex_point(5, rng).coords, 0.0));
  fixtures.push_back(zomd::StochasticProblem::dist_l1(zomd::random_simplex_point(20, rng).coords, 0.0));
  {
    Eigen::VectorXd c(10);
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = rng.uniform(-0.5, 0.5);
    fixtures.push_back(zomd::StochasticProblem::linear(c, 0.5));
  }
  fixtures.push_back(zomd::StochasticProblem::max_of_linear(8, 0.0));

  zomd::EstimatorConfig config;
  config.scheme = zomd::DirectionScheme::L1Sphere;
  config.mu = mu;
  std::int64_t draws = 0, violations = 0;
  double worst = 0.0;
  for (const auto& p : fixtures) {
    if (p.constants().m1 > m) return {false, "fixture exceeds M=1"};
    zomd::Oracle oracle(p, zomd::NoiseChannel::random_sign(delta));
    const double bound = (m + 2.0 * delta / mu) * static_cast<double>(p.dim());
    for (int k = 0; k < 25000; ++k) {
      const Eigen::VectorXd x = zomd::random_simplex_point(p.dim(), rng).coords;
      const double g = zomd::smoothed_two_point(config, oracle, x, rng).g.lpNorm<Eigen::Infinity>();
      ++draws;
      // relative slack for the rounding of (n/mu) * difference
      if (g > bound * (1.0 + 1e-12)) ++violations;
      worst = std::max(worst, g / bound);
    }
  }
  return {violations == 0, fmt::format("{} draws, {} violations, max ||g||_inf / bound = {:.4f}", draws, violations,
                                       worst)};
}

// 6. second moments of the l2-sphere estimator below their bounds (+10%)
Outcome second_moments() {
  bool all = true;
  std::string detail;
  for (std::size_t n : {8u, 32u}) {
    zomd::RngStream rng(6, 60 + n);
    const zomd::StochasticProblem quad = zomd::make_problem(zomd::ProblemKind::SmoothQuadratic, n, rng);
    const zomd::ProblemConstants& k = quad.constants();
    const Eigen::VectorXd x = zomd::random_simplex_point(n, rng).coords;
    const zomd::Tuning tuned = zomd::tune_theorem3(k.m2, k.l2, n, 0.15);
    for (double mu : {0.05, tuned.mu}) {
      for (double delta : {0.0, 0.01, tuned.delta_max}) {
        const zomd::NoiseChannel channel =
            delta > 0.0 ? zomd::NoiseChannel::random_sign(delta) : zomd::NoiseChannel::none();
        const zomd::SecondMoments m = zomd::measure_smoothed_moments(quad, channel, x, mu, 200000, rng);
        const double b2 = zomd::smoothed_l2_moment_bound(n, k.m2, k.l2, mu, delta);
        const double binf = zomd::smoothed_linf_moment_bound(n, k.m2, k.l2, mu, delta);
        const bool ok = m.l2.value <= 1.1 * b2 && m.linf.value <= 1.1 * binf;
        all = all && ok;
        if (delta == tuned.delta_max && mu == tuned.mu) {
          detail += fmt::format("n={}: E||g||_2^2={:.3g}/{:.3g}, E||g||_inf^2={:.3g}/{:.3g}; ", n, m.l2.value, b2,
                                m.linf.value, binf);
        }
        if (!ok) detail += fmt::format("FAILED n={} mu={:.3g} delta={:.3g}; ", n, mu, delta);
      }
    }
  }
  return {all, detail};
}

// 7. dimension scaling of E||g||_inf^2 for the directional estimators
Outcome variance_scaling() {
  bool all = true;
  std::string detail;
  for (const auto& s : zomd::measure_variance_scaling({8, 32, 128}, 400000, 7)) {
    const bool ok = std::fabs(s.slope - s.expected) <= 0.35;
    all = all && ok;
    detail += fmt::format("{} slope={:.3f} (target {}){}; ", zomd::to_string(s.scheme), s.slope, s.expected,
                          ok ? "" : " OUT");
  }
  return {all, detail};
}

// 8. Rademacher Z-scheme: E||g||_inf^2 <= M2^2 + 3 SE on every fixture
Outcome rademacher_moment() {
  bool all = true;
  double worst = 0.0;
  int count = 0;
  for (std::size_t n : {4u, 16u, 64u}) {
    zomd::RngStream rng(8, 80 + n);
    for (zomd::ProblemKind kind : {zomd::ProblemKind::LinearNoisy, zomd::ProblemKind::NonsmoothDistL1,
                                   zomd::ProblemKind::SmoothQuadratic, zomd::ProblemKind::MaxOfLinear}) {
      const zomd::StochasticProblem p = zomd::make_problem(kind, n, rng);
      zomd::EstimatorConfig config;
      config.family = zomd::EstimatorFamily::ZScheme;
      config.z_kind = zomd::ZKind::Rademacher;
      const Eigen::VectorXd x = zomd::random_simplex_point(n, rng).coords;
      const zomd::Estimate e = zomd::measure_exact_linf_moment(p, config, x, 200000, rng);
      const double m2sq = p.constants().m2 * p.constants().m2;
      all = all && e.value <= m2sq + 3.0 * e.std_error;
      worst = std::max(worst, e.value / m2sq);
      ++count;
    }
  }
  return {all, fmt::format("{} fixture/dimension pairs, max E||g||_inf^2 / M2^2 = {:.4f}", count, worst)};
}

// 9. tuning arithmetic
Outcome tuning_values() {
  const zomd::Tuning t2 = zomd::tune_theorem2(1.0, 10, 0.1);
  const zomd::Tuning t3 = zomd::tune_theorem3(1.0, 1.0, 100, 0.01, zomd::DualNorm::LInf);
  const bool ok = t2.iterations == 1473655 && std::fabs(t3.mu - 0.040825) <= 1e-6 &&
                  std::fabs(t3.delta_max - 4.17e-4) <= 1e-6;
  return {ok, fmt::format("N={} mu={:.7f} delta_max={:.5e}", t2.iterations, t3.mu, t3.delta_max)};
}

// 10. shift invariance and feasibility of the dual-averaging map over long runs
Outcome softmax_fuzz() {
  const std::int64_t steps = 10000000;
  double max_shift_err = 0.0, max_sum_err = 0.0, min_coord = 1.0;
  for (std::size_t n : {3u, 16u}) {
    zomd::RngStream rng(10, 100 + n);
    const zomd::StepSchedule schedule = zomd::StepSchedule::manual(0.5);
    zomd::DualState a(n, schedule), b(n, schedule);
    const auto dim = static_cast<Eigen::Index>(n);
    Eigen::VectorXd g(dim);
    for (std::int64_t k = 0; k < steps; ++k) {
      // dyadic grid values keep s and s + c exactly representable
      for (Eigen::Index i = 0; i < dim; ++i) g[i] = std::ldexp(static_cast<double>(rng.below(2049)) - 1024.0, -8);
      const double shift = std::ldexp(static_cast<double>(rng.below(8193)) - 4096.0, -7);
      const zomd::SimplexPoint xa = a.step(g);
      g.array() += shift;
      const zomd::SimplexPoint xb = b.step(g);
      max_shift_err = std::max(max_shift_err, (xa.coords - xb.coords).cwiseAbs().maxCoeff());
      max_sum_err = std::max(max_sum_err, std::fabs(xa.coords.sum() - 1.0));
      min_coord = std::min(min_coord, xa.coords.minCoeff());
    }
  }
  const bool ok = max_shift_err <= 1e-12 && max_sum_err <= 1e-12 && min_coord >= 0.0;
  return {ok, fmt::format("2 runs x {} steps: shift err {:.2e}, |sum-1| {:.2e}, min x {:.2e}", steps, max_shift_err,
                          max_sum_err, min_coord)};
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// 11. byte-identical CSV from two CLI invocations of one spec
Outcome determinism(const std::string& cli, const std::string& workdir) {
  if (cli.empty()) return {false, "no --cli given"};
  const std::string args =
      "sweep --problem quad --n-list 6,3 --schedule thm3 --eps 0.5 --estimator p2 --noise uniform --delta auto "
      "--reps 6 --seed 11 --threads 3";
  std::vector<std::string> outputs;
  for (int k = 0; k < 2; ++k) {
    const std::string path = fmt::format("{}/determinism_{}.csv", workdir, k);
    std::remove(path.c_str());
    const std::string cmd = fmt::format("\"{}\" {} --out \"{}\"", cli, args, path);
    if (std::system(cmd.c_str()) != 0) return {false, "CLI invocation failed: " + cmd};
    outputs.push_back(slurp(path));
  }
  const bool ok = !outputs[0].empty() && outputs[0] == outputs[1];
  return {ok, fmt::format("{} bytes per file, {}", outputs[0].size(), ok ? "identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks for the zomd library"};
  std::string cli, workdir = ".";
  std::vector<int> only;
  app.add_option("--cli", cli, "Path to the zomd executable");
  app.add_option("--workdir", workdir, "Scratch directory for CLI output");
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "exact stochastic subgradient rate", 60, exact_rate},
      {2, "nonsmooth gradient-free end-to-end (l1 sphere, sign noise)", 300, nonsmooth_end_to_end},
      {3, "smooth gradient-free end-to-end (l2 sphere, sign noise)", 300, smooth_end_to_end},
      {4, "two-point estimator is unbiased for grad f^mu", 120, unbiasedness},
      {5, "hard bound ||g||_inf <= (M + 2 delta/mu) n", 0, l1_hard_bound},
      {6, "second-moment bounds of the l2-sphere estimator", 0, second_moments},
      {7, "variance scaling of the directional estimators", 0, variance_scaling},
      {8, "Rademacher moment E||g||_inf^2 <= M2^2", 0, rademacher_moment},
      {9, "tuning formula arithmetic", 0, tuning_values},
      {10, "softmax shift invariance and feasibility", 0, softmax_fuzz},
      {11, "byte-identical CSV for identical specs", 0, [&] { return determinism(cli, workdir); }},
  };

  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0 && secs > c.time_limit) {
      o.pass = false;
      o.detail += fmt::format(" [over time limit {}s]", c.time_limit);
    }
    failures += !o.pass;
    std::cout << fmt::format("{} [{:2}] {} ({:.1f}s): {}", o.pass ? "PASS" : "FAIL", c.id, c.title, secs, o.detail)
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
