#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string_view>

#include "zomd/errors.hpp"
#include "zomd/rng.hpp"

namespace zomd {

enum class DirectionScheme {
  L1Sphere,
  L2Sphere,
  LInfSphere,
  LInfBall,
  Rademacher,
  Coordinate,
  L1Ball,
  L2Ball,
};

inline std::string_view to_string(DirectionScheme s) {
  switch (s) {
    case DirectionScheme::L1Sphere: return "l1-sphere";
    case DirectionScheme::L2Sphere: return "l2-sphere";
    case DirectionScheme::LInfSphere: return "linf-sphere";
    case DirectionScheme::LInfBall: return "linf-ball";
    case DirectionScheme::Rademacher: return "rademacher";
    case DirectionScheme::Coordinate: return "coordinate";
    case DirectionScheme::L1Ball: return "l1-ball";
    case DirectionScheme::L2Ball: return "l2-ball";
  }
  return "?";
}

/// One random direction together with the law it was drawn from.
struct Direction {
  Eigen::VectorXd coords;
  DirectionScheme scheme;
};

namespace detail {

inline double sign_nonneg(double v) { return v < 0.0 ? -1.0 : 1.0; }

inline Eigen::VectorXd laplace_on_l1_sphere(std::size_t n, RngStream& rng) {
  Eigen::VectorXd a(n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = rng.laplace();
  return a / a.lpNorm<1>();
}

inline Eigen::VectorXd gaussian_on_l2_sphere(std::size_t n, RngStream& rng) {
  Eigen::VectorXd a(n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = rng.normal();
  return a / a.norm();
}

}  // namespace detail

/// Draws one direction of the given scheme in R^n.
///
/// Sphere schemes normalise i.i.d. Laplace (l1) or Gaussian (l2) vectors;
/// the l-inf sphere picks one of the 2n faces uniformly and fills the free
/// coordinates uniformly on [-1, 1]. Ball schemes scale a sphere draw by
/// U^{1/n}. Coordinate draws sqrt(n) e_i, so that E[Z Z^T] = I.
inline Direction sample_direction(DirectionScheme scheme, std::size_t n, RngStream& rng) {
  require_dimension(n);
  const auto dim = static_cast<Eigen::Index>(n);
  Direction d{Eigen::VectorXd(dim), scheme};
  switch (scheme) {
    case DirectionScheme::L1Sphere:
      d.coords = detail::laplace_on_l1_sphere(n, rng);
      break;
    case DirectionScheme::L2Sphere:
      d.coords = detail::gaussian_on_l2_sphere(n, rng);
      break;
    case DirectionScheme::LInfSphere: {
      const std::uint64_t face = rng.below(2 * n);
      for (Eigen::Index i = 0; i < dim; ++i) d.coords[i] = rng.uniform(-1.0, 1.0);
      d.coords[static_cast<Eigen::Index>(face / 2)] = (face % 2 == 0) ? 1.0 : -1.0;
      break;
    }
    case DirectionScheme::LInfBall:
      for (Eigen::Index i = 0; i < dim; ++i) d.coords[i] = rng.uniform(-1.0, 1.0);
      break;
    case DirectionScheme::Rademacher:
      for (Eigen::Index i = 0; i < dim; ++i) d.coords[i] = rng.rademacher();
      break;
    case DirectionScheme::Coordinate:
      d.coords.setZero();
      d.coords[static_cast<Eigen::Index>(rng.below(n))] = std::sqrt(static_cast<double>(n));
      break;
    case DirectionScheme::L1Ball: {
      d.coords = detail::laplace_on_l1_sphere(n, rng);
      d.coords *= std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
      break;
    }
    case DirectionScheme::L2Ball: {
      d.coords = detail::gaussian_on_l2_sphere(n, rng);
      d.coords *= std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
      break;
    }
  }
  return d;
}

/// Index of the largest |e_i|; ties go to the smallest index.
inline Eigen::Index argmax_abs(const Eigen::VectorXd& e) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < e.size(); ++i) {
    if (std::fabs(e[i]) > std::fabs(e[best])) best = i;
  }
  return best;
}

/// Unit (l2) outward normal of the unit sphere of e's scheme at e.
///
/// l1: sign(e)/sqrt(n) with sign(0) = +1. l2: e. l-inf: sign(e_i) e_i at
/// i = argmax |e_i|. The l-inf ball approximation uses the same rule.
inline Eigen::VectorXd surface_normal(const Direction& e) {
  const Eigen::Index n = e.coords.size();
  switch (e.scheme) {
    case DirectionScheme::L1Sphere:
      return e.coords.unaryExpr(&detail::sign_nonneg) / std::sqrt(static_cast<double>(n));
    case DirectionScheme::L2Sphere:
      return e.coords;
    case DirectionScheme::LInfSphere:
    case DirectionScheme::LInfBall: {
      Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
      const Eigen::Index i = argmax_abs(e.coords);
      out[i] = detail::sign_nonneg(e.coords[i]);
      return out;
    }
    default:
      throw std::invalid_argument("surface_normal: scheme " + std::string(to_string(e.scheme)) +
                                  " is not a sphere scheme");
  }
}

}  // namespace zomd
