#pragma once

#include <fmt/format.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "zomd/estimators.hpp"
#include "zomd/oracle.hpp"
#include "zomd/problems.hpp"
#include "zomd/rng.hpp"
#include "zomd/sampling.hpp"
#include "zomd/stats.hpp"

namespace zomd {

enum class VerifySuite { Unbiasedness, VarianceBounds, VolumeRatio, MomentBounds };

inline std::string_view to_string(VerifySuite s) {
  switch (s) {
    case VerifySuite::Unbiasedness: return "unbiasedness";
    case VerifySuite::VarianceBounds: return "variance";
    case VerifySuite::VolumeRatio: return "volume";
    case VerifySuite::MomentBounds: return "moments";
  }
  return "?";
}

inline VerifySuite parse_verify_suite(std::string_view s) {
  if (s == "unbiasedness") return VerifySuite::Unbiasedness;
  if (s == "variance") return VerifySuite::VarianceBounds;
  if (s == "volume") return VerifySuite::VolumeRatio;
  if (s == "moments") return VerifySuite::MomentBounds;
  throw std::invalid_argument("unknown verify suite '" + std::string(s) + "'");
}

/// Outcome of one Monte-Carlo or formula check. `measured` is compared
/// against `threshold` with the direction described in `name`.
struct CheckResult {
  std::string suite;
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  double std_error = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  std::vector<std::size_t> n_list;
  std::uint64_t seed = 1;
  std::int64_t draws = 200000;
};

// ---------------------------------------------------------------------------
// Unbiasedness of the smoothed two-point estimator

/// Largest componentwise z-score between the Monte-Carlo mean of
/// smoothed_two_point and a central-difference gradient of f^mu.
struct UnbiasednessMeasurement {
  Eigen::VectorXd estimator_mean;
  Eigen::VectorXd estimator_se;
  Eigen::VectorXd reference_mean;
  Eigen::VectorXd reference_se;
  double max_z = 0.0;
};

inline DirectionScheme smoothing_ball_for(DirectionScheme sphere) {
  switch (sphere) {
    case DirectionScheme::L1Sphere: return DirectionScheme::L1Ball;
    case DirectionScheme::L2Sphere: return DirectionScheme::L2Ball;
    default: return DirectionScheme::LInfBall;
  }
}

inline UnbiasednessMeasurement measure_unbiasedness(const StochasticProblem& problem, const NoiseChannel& channel,
                                                    DirectionScheme sphere, const Eigen::VectorXd& x, double mu,
                                                    std::int64_t draws, std::int64_t reference_draws,
                                                    std::uint64_t seed) {
  EstimatorConfig config;
  config.family = EstimatorFamily::SmoothedTwoPoint;
  config.scheme = sphere;
  config.mu = mu;
  Oracle oracle(problem, channel);
  RngStream rng(seed, 11);
  VectorRunningMean acc(x.size());
  for (std::int64_t k = 0; k < draws; ++k) acc.add(smoothed_two_point(config, oracle, x, rng).g);

  RngStream ref_rng(seed, 12);
  const VectorEstimate ref =
      smoothed_gradient_fd(problem, x, mu, smoothing_ball_for(sphere), 1e-4, reference_draws, ref_rng);

  UnbiasednessMeasurement m{acc.mean(), acc.std_error(), ref.value, ref.std_error, 0.0};
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double se = std::hypot(m.estimator_se[j], m.reference_se[j]);
    m.max_z = std::max(m.max_z, std::fabs(m.estimator_mean[j] - m.reference_mean[j]) / se);
  }
  return m;
}

inline std::vector<CheckResult> verify_unbiasedness(const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  for (std::size_t n : opt.n_list) {
    RngStream fixture(opt.seed, n);
    const StochasticProblem problem = make_problem(ProblemKind::SmoothQuadratic, n, fixture);
    const Eigen::VectorXd x = random_simplex_point(n, fixture).coords;
    for (DirectionScheme sphere : {DirectionScheme::L1Sphere, DirectionScheme::L2Sphere}) {
      for (double delta : {0.0, 0.01}) {
        const NoiseChannel channel = delta > 0.0 ? NoiseChannel::uniform(delta) : NoiseChannel::none();
        const UnbiasednessMeasurement m = measure_unbiasedness(problem, channel, sphere, x, 0.1, opt.draws,
                                                               std::max<std::int64_t>(opt.draws / 5, 1000),
                                                               opt.seed + n);
        out.push_back({"unbiasedness",
                       fmt::format("{} n={} delta={}: max |mean g - grad f^mu| / SE <= 4", to_string(sphere), n,
                                   delta),
                       m.max_z, 4.0, 0.0, m.max_z <= 4.0});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Second moments of the estimators

/// Monte-Carlo E||g||_2^2 and E||g||_inf^2 of the smoothed l2-sphere
/// estimator at a fixed x.
struct SecondMoments {
  Estimate l2;
  Estimate linf;
};

inline SecondMoments measure_smoothed_moments(const StochasticProblem& problem, const NoiseChannel& channel,
                                              const Eigen::VectorXd& x, double mu, std::int64_t draws,
                                              RngStream& rng) {
  EstimatorConfig config;
  config.family = EstimatorFamily::SmoothedTwoPoint;
  config.scheme = DirectionScheme::L2Sphere;
  config.mu = mu;
  Oracle oracle(problem, channel);
  RunningMean l2, linf;
  for (std::int64_t k = 0; k < draws; ++k) {
    const Eigen::VectorXd g = smoothed_two_point(config, oracle, x, rng).g;
    l2.add(g.squaredNorm());
    const double m = g.lpNorm<Eigen::Infinity>();
    linf.add(m * m);
  }
  return {{l2.mean(), l2.std_error()}, {linf.mean(), linf.std_error()}};
}

/// 3 n M2^2 + (3/4) n^2 L2^2 mu^2 + 12 n^2 delta^2 / mu^2
inline double smoothed_l2_moment_bound(std::size_t n, double m2, double l2, double mu, double delta) {
  const double dn = static_cast<double>(n);
  return 3.0 * dn * m2 * m2 + 0.75 * dn * dn * l2 * l2 * mu * mu + 12.0 * dn * dn * delta * delta / (mu * mu);
}

/// 4 ln n M2^2 + 3 n ln n L2^2 mu^2 + 48 n ln n delta^2 / mu^2
inline double smoothed_linf_moment_bound(std::size_t n, double m2, double l2, double mu, double delta) {
  const double dn = static_cast<double>(n);
  const double ln_n = std::log(dn);
  return 4.0 * ln_n * m2 * m2 + 3.0 * dn * ln_n * l2 * l2 * mu * mu + 48.0 * dn * ln_n * delta * delta / (mu * mu);
}

/// E||g||_inf^2 of an exact-gradient estimator family at x.
inline Estimate measure_exact_linf_moment(const StochasticProblem& problem, const EstimatorConfig& config,
                                          const Eigen::VectorXd& x, std::int64_t draws, RngStream& rng) {
  Oracle oracle(problem, NoiseChannel::none());
  RunningMean acc;
  for (std::int64_t k = 0; k < draws; ++k) {
    const double m = estimate_gradient(config, oracle, x, rng).g.lpNorm<Eigen::Infinity>();
    acc.add(m * m);
  }
  return {acc.mean(), acc.std_error()};
}

/// Linear fixture with ||c||_2 = 1 and no realisation noise, so M2 = 1 for
/// every n; used to isolate the dimension dependence of the estimators.
inline StochasticProblem unit_gradient_fixture(std::size_t n, RngStream& rng) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = rng.normal();
  c /= c.norm();
  return StochasticProblem::linear(std::move(c), 0.0);
}

/// Least-squares slope of log y against log x.
inline double log_log_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("need >= 2 points for a slope");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxy += dx * (std::log(ys[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

/// Dimension scaling of E||g||_inf^2 for the directional estimators: the
/// slope for p=2 is taken after dividing by ln n.
struct ScalingMeasurement {
  DirectionScheme scheme;
  std::vector<double> moments;
  double slope = 0.0;
  double expected = 0.0;
};

inline std::vector<ScalingMeasurement> measure_variance_scaling(const std::vector<std::size_t>& n_list,
                                                                std::int64_t draws, std::uint64_t seed) {
  std::vector<ScalingMeasurement> out;
  const std::pair<DirectionScheme, double> cases[] = {
      {DirectionScheme::L1Sphere, 1.0}, {DirectionScheme::L2Sphere, 0.0}, {DirectionScheme::LInfSphere, 2.0}};
  for (const auto& [scheme, expected] : cases) {
    ScalingMeasurement m{scheme, {}, 0.0, expected};
    std::vector<double> xs, ys;
    for (std::size_t n : n_list) {
      RngStream rng(seed, 100 + n);
      const StochasticProblem problem = unit_gradient_fixture(n, rng);
      EstimatorConfig config;
      config.family = EstimatorFamily::DirectionalExact;
      config.scheme = scheme;
      const Estimate e = measure_exact_linf_moment(problem, config, SimplexPoint::uniform(n).coords, draws, rng);
      m.moments.push_back(e.value);
      xs.push_back(static_cast<double>(n));
      ys.push_back(scheme == DirectionScheme::L2Sphere ? e.value / std::log(static_cast<double>(n)) : e.value);
    }
    m.slope = log_log_slope(xs, ys);
    out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<CheckResult> verify_variance_bounds(const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  for (std::size_t n : opt.n_list) {
    RngStream rng(opt.seed, 200 + n);
    const StochasticProblem quad = make_problem(ProblemKind::SmoothQuadratic, n, rng);
    const ProblemConstants& k = quad.constants();
    const Eigen::VectorXd x = random_simplex_point(n, rng).coords;
    const double mu = 0.05;
    for (double delta : {0.0, 0.01}) {
      const NoiseChannel channel = delta > 0.0 ? NoiseChannel::random_sign(delta) : NoiseChannel::none();
      const SecondMoments m = measure_smoothed_moments(quad, channel, x, mu, opt.draws, rng);
      const double b2 = smoothed_l2_moment_bound(n, k.m2, k.l2, mu, delta);
      const double binf = smoothed_linf_moment_bound(n, k.m2, k.l2, mu, delta);
      out.push_back({"variance", fmt::format("E||g||_2^2 <= 1.1 x bound (quad n={} delta={})", n, delta),
                     m.l2.value, 1.1 * b2, m.l2.std_error, m.l2.value <= 1.1 * b2});
      out.push_back({"variance", fmt::format("E||g||_inf^2 <= 1.1 x bound (quad n={} delta={})", n, delta),
                     m.linf.value, 1.1 * binf, m.linf.std_error, m.linf.value <= 1.1 * binf});
    }

    for (ProblemKind kind : {ProblemKind::LinearNoisy, ProblemKind::NonsmoothDistL1, ProblemKind::SmoothQuadratic,
                             ProblemKind::MaxOfLinear}) {
      const StochasticProblem p = make_problem(kind, n, rng);
      EstimatorConfig config;
      config.family = EstimatorFamily::ZScheme;
      config.z_kind = ZKind::Rademacher;
      const Estimate e = measure_exact_linf_moment(p, config, random_simplex_point(n, rng).coords, opt.draws, rng);
      const double m2sq = p.constants().m2 * p.constants().m2;
      out.push_back({"variance",
                     fmt::format("rademacher E||g||_inf^2 <= M2^2 + 3 SE ({} n={})", to_string(kind), n), e.value,
                     m2sq + 3.0 * e.std_error, e.std_error, e.value <= m2sq + 3.0 * e.std_error});
    }
  }

  for (const ScalingMeasurement& s : measure_variance_scaling({8, 32, 128}, opt.draws, opt.seed)) {
    const bool ok = std::fabs(s.slope - s.expected) <= 0.35;
    out.push_back({"variance",
                   fmt::format("directional {} log-log slope of E||g||_inf^2{} within 0.35 of {}",
                               to_string(s.scheme), s.scheme == DirectionScheme::L2Sphere ? "/ln n" : "",
                               s.expected),
                   s.slope, s.expected, 0.0, ok});
  }
  return out;
}

// ---------------------------------------------------------------------------
// l1 volume ratio

/// log Vol(S_1^n(mu)) = n ln 2 + ln sqrt(n) + (n-1) ln mu - ln (n-1)!
inline double log_l1_sphere_volume(std::size_t n, double mu) {
  const double dn = static_cast<double>(n);
  return dn * std::log(2.0) + 0.5 * std::log(dn) + (dn - 1.0) * std::log(mu) - std::lgamma(dn);
}

/// log Vol(B_1^n(mu)) = n ln 2 + n ln mu - ln n!
inline double log_l1_ball_volume(std::size_t n, double mu) {
  const double dn = static_cast<double>(n);
  return dn * std::log(2.0) + dn * std::log(mu) - std::lgamma(dn + 1.0);
}

/// Checks Vol(B)/Vol(S) through the divergence identity
/// Vol(B) E_B[grad h(x + v)] = Vol(S) E_S[h(x + u) nu(u)] for
/// h(y) = sum_i w_i exp(y_i); returns the largest residual z-score.
inline double measure_divergence_identity(std::size_t n, double mu, std::int64_t draws, std::uint64_t seed) {
  const auto dim = static_cast<Eigen::Index>(n);
  const Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(dim, 0.5, 1.5);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(dim, -0.2, 0.3);
  const double ratio = l1_volume_ratio(n, mu);
  RngStream rng(seed, 300 + n);
  VectorRunningMean surface(dim), volume(dim);
  for (std::int64_t k = 0; k < draws; ++k) {
    const Direction e = sample_direction(DirectionScheme::L1Sphere, n, rng);
    const double h = w.dot((x + mu * e.coords).array().exp().matrix());
    // nu / ratio with nu = sign(e)/sqrt(n)
    surface.add(h * surface_normal(e) / ratio);
    const Direction b = sample_direction(DirectionScheme::L1Ball, n, rng);
    volume.add(w.cwiseProduct((x + mu * b.coords).array().exp().matrix()));
  }
  double max_z = 0.0;
  const Eigen::VectorXd se_s = surface.std_error(), se_v = volume.std_error();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double se = std::hypot(se_s[j], se_v[j]);
    max_z = std::max(max_z, std::fabs(surface.mean()[j] - volume.mean()[j]) / se);
  }
  return max_z;
}

inline std::vector<CheckResult> verify_volume_ratio(const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  const double mu = 0.3;
  for (std::size_t n = 2; n <= 6; ++n) {
    const double analytic = l1_volume_ratio(n, mu);
    const double from_volumes = std::exp(log_l1_ball_volume(n, mu) - log_l1_sphere_volume(n, mu));
    const double rel = std::fabs(analytic - from_volumes) / analytic;
    out.push_back({"volume", fmt::format("n={} mu/(n sqrt n)={:.6f} matches volume formulas (rel err)", n, analytic),
                   rel, 1e-12, 0.0, rel <= 1e-12});
    const double z = measure_divergence_identity(n, mu, opt.draws, opt.seed);
    out.push_back({"volume", fmt::format("n={} divergence identity residual / SE <= 4", n), z, 4.0, 0.0, z <= 4.0});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Moments of the direction samplers

/// E||e||_q^2 bound for e uniform on the l2 sphere: (q-1) n^{2/q-1} for
/// finite q, 4 ln n / n for q = inf (pass q = 0 for infinity).
inline double l2_sphere_norm_moment_bound(std::size_t n, int q) {
  const double dn = static_cast<double>(n);
  if (q == 0) return 4.0 * std::log(dn) / dn;
  return (q - 1.0) * std::pow(dn, 2.0 / q - 1.0);
}

inline Estimate measure_l2_sphere_norm_moment(std::size_t n, int q, std::int64_t draws, RngStream& rng) {
  RunningMean acc;
  for (std::int64_t k = 0; k < draws; ++k) {
    const Eigen::VectorXd e = sample_direction(DirectionScheme::L2Sphere, n, rng).coords;
    double norm = 0.0;
    if (q == 0) {
      norm = e.lpNorm<Eigen::Infinity>();
    } else {
      norm = std::pow(e.array().abs().pow(q).sum(), 1.0 / q);
    }
    acc.add(norm * norm);
  }
  return {acc.mean(), acc.std_error()};
}

/// Empirical E[Z Z^T] with its entrywise standard errors.
struct SecondMomentMatrix {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd std_error;
};

inline SecondMomentMatrix measure_outer_product(DirectionScheme scheme, std::size_t n, std::int64_t draws,
                                                RngStream& rng) {
  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(dim, dim);
  for (std::int64_t k = 0; k < draws; ++k) {
    const Eigen::VectorXd z = sample_direction(scheme, n, rng).coords;
    const Eigen::MatrixXd outer = z * z.transpose();
    sum += outer;
    sum_sq += outer.cwiseProduct(outer);
  }
  const double c = static_cast<double>(draws);
  SecondMomentMatrix m;
  m.mean = sum / c;
  const Eigen::MatrixXd var = ((sum_sq / c) - m.mean.cwiseProduct(m.mean)) * (c / (c - 1.0));
  m.std_error = (var.cwiseMax(0.0) / c).cwiseSqrt();
  return m;
}

inline std::vector<CheckResult> verify_moment_bounds(const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  for (std::size_t n : opt.n_list) {
    RngStream rng(opt.seed, 400 + n);
    for (int q : {2, 4, 0}) {
      const Estimate e = measure_l2_sphere_norm_moment(n, q, opt.draws, rng);
      const double bound = l2_sphere_norm_moment_bound(n, q);
      const double limit = bound + 3.0 * e.std_error + 1e-12;
      out.push_back({"moments", fmt::format("l2-sphere E||e||_{}^2 <= bound (n={})", q == 0 ? "inf" : std::to_string(q), n),
                     e.value, limit, e.std_error, e.value <= limit});
    }
    if (n <= 16) {
      const SecondMomentMatrix rad = measure_outer_product(DirectionScheme::Rademacher, n, opt.draws, rng);
      const auto dim = static_cast<Eigen::Index>(n);
      const double err = (rad.mean - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff();
      const double tol = std::max(5e-3, 5.0 * rad.std_error.maxCoeff());
      out.push_back({"moments", fmt::format("rademacher E[ZZ^T] = I entrywise (n={})", n), err, tol, 0.0, err <= tol});

      const SecondMomentMatrix sph = measure_outer_product(DirectionScheme::L2Sphere, n, opt.draws, rng);
      const double frob = (sph.mean - Eigen::MatrixXd::Identity(dim, dim) / static_cast<double>(n)).norm();
      const double frob_se = sph.std_error.norm();
      out.push_back({"moments", fmt::format("l2-sphere E[ee^T] = I/n, Frobenius error <= 3 SE (n={})", n), frob,
                     3.0 * frob_se, frob_se, frob <= 3.0 * frob_se});
    }
  }
  return out;
}

inline std::vector<CheckResult> verify_suite(VerifySuite which, const VerifyOptions& opt) {
  switch (which) {
    case VerifySuite::Unbiasedness: return verify_unbiasedness(opt);
    case VerifySuite::VarianceBounds: return verify_variance_bounds(opt);
    case VerifySuite::VolumeRatio: return verify_volume_ratio(opt);
    case VerifySuite::MomentBounds: return verify_moment_bounds(opt);
  }
  return {};
}

inline void print_checks(std::ostream& out, const std::vector<CheckResult>& checks) {
  for (const CheckResult& c : checks) {
    out << fmt::format("[{}] {:<13} {}  measured={:.6g} threshold={:.6g}", c.pass ? "PASS" : "FAIL", c.suite,
                       c.name, c.measured, c.threshold);
    if (c.std_error > 0.0) out << fmt::format(" se={:.3g}", c.std_error);
    out << '\n';
  }
}

}  // namespace zomd
