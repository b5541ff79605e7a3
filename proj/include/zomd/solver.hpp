#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "zomd/errors.hpp"
#include "zomd/estimators.hpp"
#include "zomd/oracle.hpp"
#include "zomd/problems.hpp"
#include "zomd/rng.hpp"

namespace zomd {

enum class Schedule { Theorem1, Theorem2, Theorem3, Manual };

inline std::string_view to_string(Schedule s) {
  switch (s) {
    case Schedule::Theorem1: return "thm1";
    case Schedule::Theorem2: return "thm2";
    case Schedule::Theorem3: return "thm3";
    case Schedule::Manual: return "manual";
  }
  return "?";
}

inline Schedule parse_schedule(std::string_view s) {
  if (s == "thm1") return Schedule::Theorem1;
  if (s == "thm2") return Schedule::Theorem2;
  if (s == "thm3") return Schedule::Theorem3;
  if (s == "manual") return Schedule::Manual;
  throw std::invalid_argument("unknown schedule '" + std::string(s) + "'");
}

/// Step-size rule beta_t = constant * sqrt(t) / sqrt(ln n) for the
/// bounded-subgradient schedules (constant M or 2Mn) and
/// beta_t = constant * sqrt(t) otherwise (constant M2 sqrt(5) or manual).
struct StepSchedule {
  Schedule kind = Schedule::Manual;
  double constant = 1.0;

  static StepSchedule theorem1(double m) { return {Schedule::Theorem1, m}; }
  static StepSchedule theorem2(double m, std::size_t n) { return {Schedule::Theorem2, 2.0 * m * static_cast<double>(n)}; }
  static StepSchedule theorem3(double m2) { return {Schedule::Theorem3, m2 * std::sqrt(5.0)}; }
  static StepSchedule manual(double c) { return {Schedule::Manual, c}; }

  double beta(std::int64_t t, std::size_t n) const {
    const double root = std::sqrt(static_cast<double>(t));
    if (kind == Schedule::Theorem1 || kind == Schedule::Theorem2) {
      return constant * root / std::sqrt(std::log(static_cast<double>(n)));
    }
    return constant * root;
  }
};

/// Softmax of -s / beta with the minimum of s shifted out.
inline SimplexPoint exponential_weights(const Eigen::VectorXd& s, double beta) {
  const double lo = s.minCoeff();
  Eigen::VectorXd w = (-(s.array() - lo) / beta).exp().matrix();
  w /= w.sum();
  return {std::move(w)};
}

/// Dual-averaging state: the running sum s of surrogate gradients and the
/// number t of gradients absorbed. The current primal iterate is
/// x^{t+1} = softmax(-s / beta_{t+1}); x^1 is uniform.
class DualState {
 public:
  DualState(std::size_t n, StepSchedule schedule)
      : s_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))), schedule_(schedule) {
    require_dimension(n);
    check_schedule();
  }

  DualState(Eigen::VectorXd s, std::int64_t t, StepSchedule schedule)
      : s_(std::move(s)), t_(t), schedule_(schedule) {
    require_dimension(static_cast<std::size_t>(s_.size()));
    if (t_ < 0) throw std::invalid_argument("iteration counter must be >= 0");
    check_schedule();
  }

  const Eigen::VectorXd& dual() const { return s_; }
  std::int64_t t() const { return t_; }
  std::size_t dim() const { return static_cast<std::size_t>(s_.size()); }
  const StepSchedule& schedule() const { return schedule_; }

  SimplexPoint primal() const { return exponential_weights(s_, schedule_.beta(t_ + 1, dim())); }

  /// s += g, t += 1; returns the new primal iterate.
  SimplexPoint step(const Eigen::VectorXd& g) {
    if (g.size() != s_.size()) throw std::invalid_argument("gradient dimension mismatch");
    if (!g.allFinite()) throw std::invalid_argument("non-finite gradient estimate");
    s_ += g;
    ++t_;
    return primal();
  }

 private:
  void check_schedule() const {
    if (!(schedule_.constant > 0.0) || !std::isfinite(schedule_.constant)) {
      throw std::invalid_argument("step-size constant must be finite and > 0");
    }
  }

  Eigen::VectorXd s_;
  std::int64_t t_ = 0;
  StepSchedule schedule_;
};

inline SimplexPoint md_step(DualState& state, const GradientEstimate& g) { return state.step(g.g); }

/// Parameters produced by a tuning rule.
struct Tuning {
  double mu = 0.0;
  double delta_max = 0.0;
  std::int64_t iterations = 0;
  StepSchedule schedule;
};

namespace detail {

inline std::int64_t ceil_count(double v) {
  if (!(v >= 0.0) || v >= 9.0e18) throw DomainError("iteration count overflows");
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(v)));
}

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite and > 0");
}

}  // namespace detail

/// Exact-subgradient mirror descent: N = ceil(4 M^2 ln n / eps^2) makes
/// 2 M sqrt(ln n / N) <= eps. No smoothing and no oracle noise.
inline Tuning tune_theorem1(double m, std::size_t n, double eps) {
  require_dimension(n);
  detail::require_positive(m, "M");
  detail::require_positive(eps, "eps");
  Tuning t;
  t.iterations = detail::ceil_count(4.0 * m * m * std::log(static_cast<double>(n)) / (eps * eps));
  t.schedule = StepSchedule::theorem1(m);
  return t;
}

/// Bounded-subgradient gradient-free rule (l1-sphere directions):
/// mu = eps/(2M), delta <= eps/4, beta_t = 2Mn sqrt(t)/sqrt(ln n) and
/// N = ceil(64 M^2 n^2 ln n / eps^2), or with a failure probability sigma
/// N = ceil(128 M^2 n^2 (ln n + 8 ln(1/sigma)) / eps^2).
inline Tuning tune_theorem2(double m, std::size_t n, double eps, std::optional<double> sigma = std::nullopt,
                            double mu0 = StochasticProblem::kDefaultMu0) {
  require_dimension(n);
  detail::require_positive(m, "M");
  detail::require_positive(eps, "eps");
  const double dn = static_cast<double>(n);
  Tuning t;
  t.mu = eps / (2.0 * m);
  if (t.mu > mu0) {
    throw DomainError("mu = eps/(2M) = " + std::to_string(t.mu) + " exceeds mu0 = " + std::to_string(mu0) +
                      "; use a smaller eps or a larger mu0");
  }
  t.delta_max = eps / 4.0;
  if (sigma) {
    if (!(*sigma > 0.0 && *sigma < 1.0)) throw std::invalid_argument("sigma must lie in (0, 1)");
    t.iterations = detail::ceil_count(128.0 * m * m * dn * dn * (std::log(dn) + 8.0 * std::log(1.0 / *sigma)) /
                                      (eps * eps));
  } else {
    t.iterations = detail::ceil_count(64.0 * m * m * dn * dn * std::log(dn) / (eps * eps));
  }
  t.schedule = StepSchedule::theorem2(m, n);
  return t;
}

/// Dual norm in which the estimator's second moment is controlled.
enum class DualNorm { L2, LInf };

/// Smooth gradient-free rule (l2-sphere directions).
///
/// l-inf (the simplex case): mu = min{max{eps/(2 M2), sqrt(eps/L2)},
/// (M2/L2) sqrt(1/(6n))}, delta <= M2 mu / sqrt(96 n), beta_t = M2 sqrt(5t),
/// N = ceil(80 M2^2 ln^2 n / eps^2). l2: the cap is (M2/L2) sqrt(4/(3n)),
/// delta <= M2 mu / sqrt(12 n), and the second-moment bound 5 n M2^2 gives
/// N = ceil(80 n M2^2 ln n / eps^2) with beta_t = M2 sqrt(5 n t / ln n).
inline Tuning tune_theorem3(double m2, double l2, std::size_t n, double eps, DualNorm qbar = DualNorm::LInf,
                            double mu0 = StochasticProblem::kDefaultMu0) {
  require_dimension(n);
  detail::require_positive(m2, "M2");
  detail::require_positive(eps, "eps");
  if (std::isinf(l2)) throw DomainError("L2 is infinite (nonsmooth problem); use tune_theorem2 instead");
  if (!(l2 >= 0.0)) throw std::invalid_argument("L2 must be >= 0");
  const double dn = static_cast<double>(n);
  const double ln_n = std::log(dn);
  Tuning t;
  if (l2 == 0.0) {
    // no curvature: any radius is bias-free
    t.mu = mu0;
  } else {
    const double cap = qbar == DualNorm::LInf ? (m2 / l2) * std::sqrt(1.0 / (6.0 * dn))
                                              : (m2 / l2) * std::sqrt(4.0 / (3.0 * dn));
    t.mu = std::min(std::max(eps / (2.0 * m2), std::sqrt(eps / l2)), cap);
  }
  if (t.mu > mu0) {
    throw DomainError("mu = " + std::to_string(t.mu) + " exceeds mu0 = " + std::to_string(mu0));
  }
  if (qbar == DualNorm::LInf) {
    t.delta_max = m2 * t.mu / std::sqrt(96.0 * dn);
    t.iterations = detail::ceil_count(80.0 * m2 * m2 * ln_n * ln_n / (eps * eps));
    t.schedule = StepSchedule::theorem3(m2);
  } else {
    t.delta_max = m2 * t.mu / std::sqrt(12.0 * dn);
    t.iterations = detail::ceil_count(80.0 * dn * m2 * m2 * ln_n / (eps * eps));
    t.schedule = {Schedule::Theorem3, m2 * std::sqrt(5.0 * dn / ln_n)};
  }
  return t;
}

struct RunConfig {
  EstimatorConfig estimator;
  StepSchedule schedule;
  std::int64_t iterations = 0;
  /// admissible noise of the requested schedule; exceeding it only warns
  double delta_max = std::numeric_limits<double>::infinity();
};

struct GapSample {
  std::int64_t t = 0;
  double gap = 0.0;
};

/// Trace of one mirror-descent run.
struct RunReport {
  SimplexPoint x_bar;
  /// f(x_bar_t) - f* at t = 1, 2, 4, ..., and N
  std::vector<GapSample> gap_trace;
  std::int64_t oracle_calls = 0;
  /// f(x_bar_N) - f*
  double final_gap = 0.0;
  /// (1/N) sum_k f(x^k) - f*
  double average_gap = 0.0;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
  RunConfig config;
};

/// Runs N iterations of entropic dual averaging from the uniform point,
/// drawing one gradient surrogate per iteration and averaging x^1..x^N.
inline RunReport run(const StochasticProblem& problem, const NoiseChannel& channel, const RunConfig& config,
                     RngStream& rng) {
  if (config.iterations <= 0) throw std::invalid_argument("iteration count N must be > 0");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = problem.dim();
  RunReport report;
  report.config = config;
  if (channel.delta() > config.delta_max) {
    report.warnings.push_back("noise level delta=" + std::to_string(channel.delta()) +
                              " exceeds the schedule's admissible delta_max=" + std::to_string(config.delta_max));
  }

  Oracle oracle(problem, channel);
  DualState state(n, config.schedule);
  SimplexPoint x = SimplexPoint::uniform(n);
  Eigen::VectorXd x_sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  double value_sum = 0.0;
  std::int64_t next_trace = 1;

  for (std::int64_t k = 1; k <= config.iterations; ++k) {
    x_sum += x.coords;
    value_sum += problem.objective(x.coords);
    if (k == next_trace || k == config.iterations) {
      const double gap = problem.objective(x_sum / static_cast<double>(k)) - problem.f_star();
      report.gap_trace.push_back({k, gap});
      if (k == next_trace) next_trace *= 2;
    }
    const GradientEstimate g = estimate_gradient(config.estimator, oracle, x.coords, rng);
    x = state.step(g.g);
  }

  const double dn = static_cast<double>(config.iterations);
  report.x_bar = {x_sum / dn};
  report.final_gap = problem.objective(report.x_bar.coords) - problem.f_star();
  report.average_gap = value_sum / dn - problem.f_star();
  report.oracle_calls = oracle.call_count();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace zomd
