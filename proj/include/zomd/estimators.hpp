#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "zomd/errors.hpp"
#include "zomd/oracle.hpp"
#include "zomd/problems.hpp"
#include "zomd/rng.hpp"
#include "zomd/sampling.hpp"
#include "zomd/stats.hpp"

namespace zomd {

enum class EstimatorFamily { SmoothedTwoPoint, DirectionalExact, ZScheme, ZFiniteDiff, ExactSubgradient };

/// Law of Z for the Z-scheme estimators; each has E[Z Z^T] = I.
/// ScaledGaussian is sqrt(n) times a uniform l2-sphere draw.
enum class ZKind { Rademacher, ScaledGaussian, Coordinate };

inline std::string_view to_string(ZKind k) {
  switch (k) {
    case ZKind::Rademacher: return "rademacher";
    case ZKind::ScaledGaussian: return "gaussian";
    case ZKind::Coordinate: return "coordinate";
  }
  return "?";
}

struct EstimatorConfig {
  EstimatorFamily family = EstimatorFamily::SmoothedTwoPoint;
  DirectionScheme scheme = DirectionScheme::L1Sphere;
  ZKind z_kind = ZKind::Rademacher;
  double mu = 0.0;
  double tau = 0.0;

  bool uses_oracle() const {
    return family == EstimatorFamily::SmoothedTwoPoint || family == EstimatorFamily::ZFiniteDiff;
  }
};

/// One draw of a gradient surrogate.
struct GradientEstimate {
  Eigen::VectorXd g;
  DirectionScheme scheme = DirectionScheme::L2Sphere;
  /// constant multiplying the function difference (n/mu, n, 1/tau, or 1)
  double prefactor = 1.0;
  double mu = 0.0;
};

/// Sphere direction used by the smoothed estimators in its estimator
/// scaling: the sign vector for l1 (norm sqrt(n)), e for l2, and the signed
/// basis vector at argmax |e_i| for the l-inf sphere and its cube stand-in.
/// With prefactor n/mu the sphere estimators are unbiased for grad f^mu;
/// the cube stand-in is not.
inline Eigen::VectorXd estimator_axis(const Direction& e) {
  switch (e.scheme) {
    case DirectionScheme::L1Sphere:
      return std::sqrt(static_cast<double>(e.coords.size())) * surface_normal(e);
    case DirectionScheme::L2Sphere:
    case DirectionScheme::LInfSphere:
    case DirectionScheme::LInfBall:
      return surface_normal(e);
    default:
      throw std::invalid_argument("scheme " + std::string(to_string(e.scheme)) +
                                  " cannot drive a smoothed estimator");
  }
}

/// Ratio Vol(B_1^n(mu)) / Vol(S_1^n(mu)) of the l1 ball to its surface.
inline double l1_volume_ratio(std::size_t n, double mu) {
  require_dimension(n);
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
  const double dn = static_cast<double>(n);
  return mu / (dn * std::sqrt(dn));
}

/// Two-point smoothed estimator g^mu_delta:
/// (n/mu) (f~(x + mu e; eta) - f~(x; eta)) axis(e), one oracle pair.
inline GradientEstimate smoothed_two_point(const EstimatorConfig& config, Oracle& oracle,
                                           const Eigen::VectorXd& x, RngStream& rng) {
  const auto n = static_cast<std::size_t>(x.size());
  if (!(config.mu > 0.0)) throw std::invalid_argument("smoothing radius mu must be > 0");
  if (config.mu > oracle.problem().constants().mu0) {
    throw DomainError("mu exceeds the problem's mu0");
  }
  const Direction e = sample_direction(config.scheme, n, rng);
  const Eigen::VectorXd axis = estimator_axis(e);
  const OracleResponse r = oracle.query_pair(x + config.mu * e.coords, x, rng);
  const double prefactor = static_cast<double>(n) / config.mu;
  return {prefactor * (r.value_a - r.value_b) * axis, config.scheme, prefactor, config.mu};
}

/// mu -> 0 limit of the smoothed estimator: n <grad f(x; eta), e> axis(e).
inline GradientEstimate directional_exact(DirectionScheme scheme, const StochasticProblem& problem,
                                          const Eigen::VectorXd& x, RngStream& rng) {
  const auto n = static_cast<std::size_t>(x.size());
  const Direction e = sample_direction(scheme, n, rng);
  const Eigen::VectorXd axis = estimator_axis(e);
  const Eigen::VectorXd eta = problem.sample_noise(rng);
  const double slope = problem.subgradient(x, eta).dot(e.coords);
  const double prefactor = static_cast<double>(n);
  return {prefactor * slope * axis, scheme, prefactor, 0.0};
}

inline Eigen::VectorXd sample_z(ZKind kind, std::size_t n, RngStream& rng) {
  switch (kind) {
    case ZKind::Rademacher:
      return sample_direction(DirectionScheme::Rademacher, n, rng).coords;
    case ZKind::ScaledGaussian:
      return std::sqrt(static_cast<double>(n)) * sample_direction(DirectionScheme::L2Sphere, n, rng).coords;
    case ZKind::Coordinate:
      return sample_direction(DirectionScheme::Coordinate, n, rng).coords;
  }
  throw std::invalid_argument("unknown z kind");
}

inline DirectionScheme z_scheme_label(ZKind kind) {
  switch (kind) {
    case ZKind::Rademacher: return DirectionScheme::Rademacher;
    case ZKind::ScaledGaussian: return DirectionScheme::L2Sphere;
    case ZKind::Coordinate: return DirectionScheme::Coordinate;
  }
  return DirectionScheme::Rademacher;
}

/// Z Z^T grad f(x; eta).
inline GradientEstimate z_scheme(const StochasticProblem& problem, const Eigen::VectorXd& x, ZKind kind,
                                 RngStream& rng) {
  const Eigen::VectorXd z = sample_z(kind, static_cast<std::size_t>(x.size()), rng);
  const Eigen::VectorXd eta = problem.sample_noise(rng);
  return {problem.subgradient(x, eta).dot(z) * z, z_scheme_label(kind), 1.0, 0.0};
}

/// Forward difference (f~(x + tau Z) - f~(x)) / tau * Z; biased for curved f.
inline GradientEstimate z_finite_diff(Oracle& oracle, const Eigen::VectorXd& x, ZKind kind, double tau,
                                      RngStream& rng) {
  if (!(tau > 0.0)) throw std::invalid_argument("finite-difference step tau must be > 0");
  if (tau > oracle.problem().constants().mu0) throw DomainError("tau exceeds the problem's mu0");
  const Eigen::VectorXd z = sample_z(kind, static_cast<std::size_t>(x.size()), rng);
  const OracleResponse r = oracle.query_pair(x + tau * z, x, rng);
  return {(r.value_a - r.value_b) / tau * z, z_scheme_label(kind), 1.0 / tau, 0.0};
}

/// Exact stochastic subgradient grad f(x; eta) (no randomised direction).
inline GradientEstimate exact_subgradient(const StochasticProblem& problem, const Eigen::VectorXd& x,
                                          RngStream& rng) {
  const Eigen::VectorXd eta = problem.sample_noise(rng);
  return {problem.subgradient(x, eta), DirectionScheme::L2Sphere, 1.0, 0.0};
}

/// Dispatches one draw of the configured estimator.
inline GradientEstimate estimate_gradient(const EstimatorConfig& config, Oracle& oracle,
                                          const Eigen::VectorXd& x, RngStream& rng) {
  switch (config.family) {
    case EstimatorFamily::SmoothedTwoPoint: return smoothed_two_point(config, oracle, x, rng);
    case EstimatorFamily::DirectionalExact: return directional_exact(config.scheme, oracle.problem(), x, rng);
    case EstimatorFamily::ZScheme: return z_scheme(oracle.problem(), x, config.z_kind, rng);
    case EstimatorFamily::ZFiniteDiff: return z_finite_diff(oracle, x, config.z_kind, config.tau, rng);
    case EstimatorFamily::ExactSubgradient: return exact_subgradient(oracle.problem(), x, rng);
  }
  throw std::invalid_argument("unknown estimator family");
}

inline void require_ball_scheme(DirectionScheme scheme) {
  if (scheme != DirectionScheme::L1Ball && scheme != DirectionScheme::L2Ball &&
      scheme != DirectionScheme::LInfBall) {
    throw std::invalid_argument("smoothing needs a ball scheme, got " + std::string(to_string(scheme)));
  }
}

/// Monte-Carlo estimate of f^mu(x) = E[f(x + mu e~; eta)], e~ uniform in
/// the unit ball of `ball`.
inline Estimate smoothed_value(const StochasticProblem& problem, const Eigen::VectorXd& x, double mu,
                               DirectionScheme ball, std::int64_t n_mc, RngStream& rng) {
  require_ball_scheme(ball);
  if (mu > problem.constants().mu0) throw DomainError("mu exceeds the problem's mu0");
  if (n_mc < 1) throw std::invalid_argument("n_mc must be >= 1");
  const auto n = static_cast<std::size_t>(x.size());
  RunningMean acc;
  for (std::int64_t k = 0; k < n_mc; ++k) {
    const Direction e = sample_direction(ball, n, rng);
    const Eigen::VectorXd eta = problem.sample_noise(rng);
    acc.add(problem.value(x + mu * e.coords, eta));
  }
  return {acc.mean(), acc.std_error()};
}

/// Central-difference gradient of f^mu at x with step h, using the same
/// (e~, eta) draw on both sides of every coordinate difference.
inline VectorEstimate smoothed_gradient_fd(const StochasticProblem& problem, const Eigen::VectorXd& x,
                                           double mu, DirectionScheme ball, double h, std::int64_t n_mc,
                                           RngStream& rng) {
  require_ball_scheme(ball);
  if (n_mc < 1) throw std::invalid_argument("n_mc must be >= 1");
  const auto n = static_cast<std::size_t>(x.size());
  VectorRunningMean acc(x.size());
  Eigen::VectorXd diff(x.size());
  for (std::int64_t k = 0; k < n_mc; ++k) {
    const Direction e = sample_direction(ball, n, rng);
    const Eigen::VectorXd eta = problem.sample_noise(rng);
    Eigen::VectorXd point = x + mu * e.coords;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double base = point[j];
      point[j] = base + h;
      const double up = problem.value(point, eta);
      point[j] = base - h;
      const double down = problem.value(point, eta);
      point[j] = base;
      diff[j] = (up - down) / (2.0 * h);
    }
    acc.add(diff);
  }
  return {acc.mean(), acc.std_error()};
}

}  // namespace zomd
