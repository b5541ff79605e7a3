#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include "zomd/errors.hpp"
#include "zomd/rng.hpp"

namespace zomd {

/// A point of the unit simplex {x >= 0, sum x = 1}.
struct SimplexPoint {
  Eigen::VectorXd coords;

  static constexpr double kSumTolerance = 1e-9;

  static SimplexPoint uniform(std::size_t n) {
    require_dimension(n);
    const auto dim = static_cast<Eigen::Index>(n);
    return {Eigen::VectorXd::Constant(dim, 1.0 / static_cast<double>(n))};
  }

  static SimplexPoint vertex(std::size_t n, std::size_t i) {
    require_dimension(n);
    SimplexPoint p{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))};
    p.coords[static_cast<Eigen::Index>(i)] = 1.0;
    return p;
  }

  /// Validates and wraps; throws DomainError when off the simplex.
  static SimplexPoint checked(Eigen::VectorXd v) {
    if (!is_on_simplex(v)) throw DomainError("point is not on the unit simplex");
    return {std::move(v)};
  }

  static bool is_on_simplex(const Eigen::VectorXd& v, double tol = kSumTolerance) {
    if (v.size() < 2 || !v.allFinite()) return false;
    return v.minCoeff() >= 0.0 && std::fabs(v.sum() - 1.0) <= tol;
  }

  std::size_t dim() const { return static_cast<std::size_t>(coords.size()); }
};

/// l1 distance from z to the unit simplex: negative mass plus the gap
/// between the positive mass and 1.
inline double l1_distance_to_simplex(const Eigen::VectorXd& z) {
  double negative = 0.0;
  double positive = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] < 0.0) {
      negative -= z[i];
    } else {
      positive += z[i];
    }
  }
  return negative + std::fabs(positive - 1.0);
}

/// Draws a point of the simplex uniformly (flat Dirichlet).
inline SimplexPoint random_simplex_point(std::size_t n, RngStream& rng) {
  require_dimension(n);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = -std::log(rng.uniform_open());
  v /= v.sum();
  return {std::move(v)};
}

enum class ProblemKind { LinearNoisy, NonsmoothDistL1, SmoothQuadratic, MaxOfLinear, Constant };

inline std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::LinearNoisy: return "linear";
    case ProblemKind::NonsmoothDistL1: return "distl1";
    case ProblemKind::SmoothQuadratic: return "quad";
    case ProblemKind::MaxOfLinear: return "maxlin";
    case ProblemKind::Constant: return "constant";
  }
  return "?";
}

inline ProblemKind parse_problem_kind(std::string_view s) {
  if (s == "linear") return ProblemKind::LinearNoisy;
  if (s == "distl1") return ProblemKind::NonsmoothDistL1;
  if (s == "quad") return ProblemKind::SmoothQuadratic;
  if (s == "maxlin") return ProblemKind::MaxOfLinear;
  if (s == "constant") return ProblemKind::Constant;
  throw std::invalid_argument("unknown problem '" + std::string(s) + "'");
}

/// Lipschitz-type constants of a fixture.
///
/// m1, m2, minf bound |f(x;e) - f(y;e)| in the l1, l2 and l-inf norms of
/// x - y, i.e. the l-inf, l2 and l1 norms of the stochastic subgradient,
/// uniformly in eta over the mu0-neighbourhood of the simplex. m1 is the M
/// of the bounded-subgradient condition. l2 bounds the l2 gradient
/// Lipschitz constant (infinity for nonsmooth fixtures).
struct ProblemConstants {
  double m1 = 0.0;
  double m2 = 0.0;
  double minf = 0.0;
  double l2 = 0.0;
  double mu0 = 1.0;
};

/// A stochastic convex objective f(x) = E[f(x; eta)] on (a neighbourhood
/// of) the simplex with known minimiser.
///
/// Realisations eta are vectors with i.i.d. entries uniform on [-r, r]; the
/// kinds are
///   linear  f(x;eta) = <c + eta, x>
///   distl1  f(x;eta) = ||x - x*||_1 + <eta, x>
///   quad    f(x;eta) = 0.5 ||x - x* + eta||_2^2
///   maxlin  f(x;eta) = max_i x_i + <eta, x>
///   constant f(x;eta) = c0
/// Immutable after construction; every member is safe to call concurrently.
class StochasticProblem {
 public:
  static constexpr double kDefaultMu0 = 1.0;

  static StochasticProblem linear(Eigen::VectorXd c, double noise_radius) {
    require_dimension(static_cast<std::size_t>(c.size()));
    StochasticProblem p(ProblemKind::LinearNoisy, c.size(), noise_radius);
    Eigen::Index best = 0;
    p.f_star_ = c.minCoeff(&best);
    p.x_star_ = SimplexPoint::vertex(p.dim(), static_cast<std::size_t>(best)).coords;
    const Eigen::VectorXd envelope = c.cwiseAbs().array() + noise_radius;
    p.constants_.m1 = envelope.lpNorm<Eigen::Infinity>();
    p.constants_.m2 = envelope.norm();
    p.constants_.minf = envelope.lpNorm<1>();
    p.constants_.l2 = 0.0;
    p.c_ = std::move(c);
    return p;
  }

  static StochasticProblem dist_l1(Eigen::VectorXd x_star, double noise_radius) {
    require_on_simplex(x_star);
    StochasticProblem p(ProblemKind::NonsmoothDistL1, x_star.size(), noise_radius);
    const double n = static_cast<double>(x_star.size());
    p.f_star_ = 0.0;
    p.x_star_ = std::move(x_star);
    p.constants_.m1 = 1.0 + noise_radius;
    p.constants_.m2 = std::sqrt(n) * (1.0 + noise_radius);
    p.constants_.minf = n * (1.0 + noise_radius);
    p.constants_.l2 = std::numeric_limits<double>::infinity();
    return p;
  }

  static StochasticProblem quadratic(Eigen::VectorXd x_star, double noise_radius) {
    require_on_simplex(x_star);
    StochasticProblem p(ProblemKind::SmoothQuadratic, x_star.size(), noise_radius);
    const double n = static_cast<double>(x_star.size());
    // E[0.5 ||eta||^2] for eta uniform on [-r, r]^n
    p.quad_offset_ = n * noise_radius * noise_radius / 6.0;
    p.f_star_ = p.quad_offset_;
    // farthest simplex point from x* in each norm is a vertex
    double d1 = 0.0, d2 = 0.0, dinf = 0.0;
    for (Eigen::Index i = 0; i < x_star.size(); ++i) {
      Eigen::VectorXd diff = -x_star;
      diff[i] += 1.0;
      d1 = std::max(d1, diff.lpNorm<1>());
      d2 = std::max(d2, diff.norm());
      dinf = std::max(dinf, diff.lpNorm<Eigen::Infinity>());
    }
    const double mu0 = p.constants_.mu0;
    p.constants_.m1 = dinf + mu0 + noise_radius;
    p.constants_.m2 = d2 + mu0 + noise_radius * std::sqrt(n);
    p.constants_.minf = d1 + mu0 + noise_radius * n;
    p.constants_.l2 = 1.0;
    p.x_star_ = std::move(x_star);
    return p;
  }

  static StochasticProblem max_of_linear(std::size_t n, double noise_radius) {
    require_dimension(n);
    const auto dim = static_cast<Eigen::Index>(n);
    StochasticProblem p(ProblemKind::MaxOfLinear, dim, noise_radius);
    p.f_star_ = 1.0 / static_cast<double>(n);
    p.x_star_ = SimplexPoint::uniform(n).coords;
    p.constants_.m1 = 1.0 + noise_radius;
    p.constants_.m2 = 1.0 + noise_radius * std::sqrt(static_cast<double>(n));
    p.constants_.minf = 1.0 + noise_radius * static_cast<double>(n);
    p.constants_.l2 = std::numeric_limits<double>::infinity();
    return p;
  }

  static StochasticProblem constant(std::size_t n, double value) {
    require_dimension(n);
    StochasticProblem p(ProblemKind::Constant, static_cast<Eigen::Index>(n), 0.0);
    p.f_star_ = value;
    p.x_star_ = SimplexPoint::uniform(n).coords;
    return p;
  }

  ProblemKind kind() const { return kind_; }
  std::size_t dim() const { return static_cast<std::size_t>(n_); }
  double noise_radius() const { return noise_radius_; }
  const ProblemConstants& constants() const { return constants_; }
  double f_star() const { return f_star_; }
  const Eigen::VectorXd& x_star() const { return x_star_; }
  const Eigen::VectorXd& linear_coefficients() const { return c_; }

  /// One realisation eta.
  Eigen::VectorXd sample_noise(RngStream& rng) const {
    Eigen::VectorXd eta(n_);
    if (noise_radius_ == 0.0 || kind_ == ProblemKind::Constant) {
      eta.setZero();
      return eta;
    }
    for (Eigen::Index i = 0; i < n_; ++i) eta[i] = rng.uniform(-noise_radius_, noise_radius_);
    return eta;
  }

  Eigen::VectorXd zero_noise() const { return Eigen::VectorXd::Zero(n_); }

  /// f(x; eta).
  double value(const Eigen::VectorXd& x, const Eigen::VectorXd& eta) const {
    switch (kind_) {
      case ProblemKind::LinearNoisy: return c_.dot(x) + eta.dot(x);
      case ProblemKind::NonsmoothDistL1: return (x - x_star_).lpNorm<1>() + eta.dot(x);
      case ProblemKind::SmoothQuadratic: return 0.5 * (x - x_star_ + eta).squaredNorm();
      case ProblemKind::MaxOfLinear: return x.maxCoeff() + eta.dot(x);
      case ProblemKind::Constant: return f_star_;
    }
    return 0.0;
  }

  /// A stochastic subgradient of f(.; eta) at x. At kinks sign(0) = +1 and
  /// the first maximising index is selected.
  Eigen::VectorXd subgradient(const Eigen::VectorXd& x, const Eigen::VectorXd& eta) const {
    if (kind_ == ProblemKind::Constant) return Eigen::VectorXd::Zero(n_);
    return gradient(x) + eta;
  }

  /// Analytic f(x) = E[f(x; eta)].
  double objective(const Eigen::VectorXd& x) const {
    switch (kind_) {
      case ProblemKind::LinearNoisy: return c_.dot(x);
      case ProblemKind::NonsmoothDistL1: return (x - x_star_).lpNorm<1>();
      case ProblemKind::SmoothQuadratic: return 0.5 * (x - x_star_).squaredNorm() + quad_offset_;
      case ProblemKind::MaxOfLinear: return x.maxCoeff();
      case ProblemKind::Constant: return f_star_;
    }
    return 0.0;
  }

  /// Analytic (sub)gradient of f, same selector as subgradient().
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    switch (kind_) {
      case ProblemKind::LinearNoisy: return c_;
      case ProblemKind::NonsmoothDistL1:
        return (x - x_star_).unaryExpr([](double v) { return v < 0.0 ? -1.0 : 1.0; });
      case ProblemKind::SmoothQuadratic: return x - x_star_;
      case ProblemKind::MaxOfLinear: {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n_);
        Eigen::Index k = 0;
        x.maxCoeff(&k);
        g[k] = 1.0;
        return g;
      }
      case ProblemKind::Constant: return Eigen::VectorXd::Zero(n_);
    }
    return {};
  }

  /// True when x lies within mu0 (l1 distance) of the simplex.
  bool in_domain(const Eigen::VectorXd& x) const {
    return x.size() == n_ && x.allFinite() && l1_distance_to_simplex(x) <= constants_.mu0 + 1e-12;
  }

 private:
  StochasticProblem(ProblemKind kind, Eigen::Index n, double noise_radius)
      : kind_(kind), n_(n), noise_radius_(noise_radius) {
    if (!(noise_radius >= 0.0)) throw std::invalid_argument("noise radius must be >= 0");
    constants_.mu0 = kDefaultMu0;
  }

  static void require_on_simplex(const Eigen::VectorXd& x) {
    require_dimension(static_cast<std::size_t>(x.size()));
    if (!SimplexPoint::is_on_simplex(x)) throw DomainError("minimiser must lie on the simplex");
  }

  ProblemKind kind_;
  Eigen::Index n_;
  double noise_radius_;
  ProblemConstants constants_;
  double f_star_ = 0.0;
  double quad_offset_ = 0.0;
  Eigen::VectorXd x_star_;
  Eigen::VectorXd c_;
};

/// Default noise radius used by make_problem.
inline constexpr double kDefaultNoiseRadius = 0.1;

/// Builds a randomised fixture of the given kind: linear draws c uniform on
/// [0, 1]^n; distl1 and quad draw x* uniformly on the simplex.
inline StochasticProblem make_problem(ProblemKind kind, std::size_t n, RngStream& rng,
                                      double noise_radius = kDefaultNoiseRadius) {
  require_dimension(n);
  switch (kind) {
    case ProblemKind::LinearNoisy: {
      Eigen::VectorXd c(static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = rng.uniform();
      return StochasticProblem::linear(std::move(c), noise_radius);
    }
    case ProblemKind::NonsmoothDistL1:
      return StochasticProblem::dist_l1(random_simplex_point(n, rng).coords, noise_radius);
    case ProblemKind::SmoothQuadratic:
      return StochasticProblem::quadratic(random_simplex_point(n, rng).coords, noise_radius);
    case ProblemKind::MaxOfLinear:
      return StochasticProblem::max_of_linear(n, noise_radius);
    case ProblemKind::Constant:
      return StochasticProblem::constant(n, 0.0);
  }
  throw std::invalid_argument("unknown problem kind");
}

/// f(x) - f*, from the analytic objective.
inline double optimality_gap(const StochasticProblem& problem, const SimplexPoint& x) {
  return problem.objective(x.coords) - problem.f_star();
}

}  // namespace zomd
