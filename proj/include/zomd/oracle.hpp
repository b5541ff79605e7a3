#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "zomd/errors.hpp"
#include "zomd/problems.hpp"
#include "zomd/rng.hpp"

namespace zomd {

enum class NoiseKind { None, UniformBounded, RandomSign, MantissaTruncate };

inline std::string_view to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::None: return "none";
    case NoiseKind::UniformBounded: return "uniform";
    case NoiseKind::RandomSign: return "sign";
    case NoiseKind::MantissaTruncate: return "mantissa";
  }
  return "?";
}

inline NoiseKind parse_noise_kind(std::string_view s) {
  if (s == "none") return NoiseKind::None;
  if (s == "uniform") return NoiseKind::UniformBounded;
  if (s == "sign") return NoiseKind::RandomSign;
  if (s == "mantissa") return NoiseKind::MantissaTruncate;
  throw std::invalid_argument("unknown noise channel '" + std::string(s) + "'");
}

/// Additive oracle noise with |perturbation| <= delta, drawn independently
/// of the query point.
///
/// MantissaTruncate keeps `bits` fractional binary digits of the value and
/// replaces the last kept digit's contribution by a fair random bit, so the
/// emitted value is floor(v 2^b)/2^b + B 2^-b. Its delta is 2^-b.
class NoiseChannel {
 public:
  NoiseChannel() = default;

  static NoiseChannel none() { return {}; }
  static NoiseChannel uniform(double delta) { return NoiseChannel(NoiseKind::UniformBounded, delta, 0); }
  static NoiseChannel random_sign(double delta) { return NoiseChannel(NoiseKind::RandomSign, delta, 0); }
  static NoiseChannel mantissa(int bits) {
    if (bits < 1 || bits > 52) throw std::invalid_argument("mantissa bits must be in [1, 52]");
    return NoiseChannel(NoiseKind::MantissaTruncate, std::ldexp(1.0, -bits), bits);
  }

  static NoiseChannel make(NoiseKind kind, double delta, int bits) {
    switch (kind) {
      case NoiseKind::None: return none();
      case NoiseKind::UniformBounded: return uniform(delta);
      case NoiseKind::RandomSign: return random_sign(delta);
      case NoiseKind::MantissaTruncate: return mantissa(bits);
    }
    return none();
  }

  NoiseKind kind() const { return kind_; }
  double delta() const { return delta_; }
  int bits() const { return bits_; }

  /// Returns the perturbed value; the perturbation is value_out - value.
  double perturb(double value, RngStream& rng) const {
    switch (kind_) {
      case NoiseKind::None: return value;
      case NoiseKind::UniformBounded: return value + rng.uniform(-delta_, delta_);
      case NoiseKind::RandomSign: return value + delta_ * rng.rademacher();
      case NoiseKind::MantissaTruncate: {
        const double truncated = std::ldexp(std::floor(std::ldexp(value, bits_)), -bits_);
        const double bit = static_cast<double>(rng() >> 63);
        return truncated + bit * delta_;
      }
    }
    return value;
  }

 private:
  NoiseChannel(NoiseKind kind, double delta, int bits) : kind_(kind), delta_(delta), bits_(bits) {
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("noise delta must be finite and >= 0");
  }

  NoiseKind kind_ = NoiseKind::None;
  double delta_ = 0.0;
  int bits_ = 0;
};

/// Two noisy values of the same realisation eta at two points.
struct OracleResponse {
  double value_a = 0.0;
  double value_b = 0.0;
  /// injected perturbations (value - f(x; eta)), kept for auditing
  double noise_a = 0.0;
  double noise_b = 0.0;
  std::uint64_t eta_id = 0;
  int calls_charged = 2;
};

/// Inexact two-point zeroth-order oracle over one problem.
///
/// Each query_pair draws one eta and evaluates both points on it, adding
/// independent channel perturbations, and charges two calls.
class Oracle {
 public:
  Oracle(const StochasticProblem& problem, NoiseChannel channel)
      : problem_(&problem), channel_(channel) {}

  OracleResponse query_pair(const Eigen::VectorXd& x_a, const Eigen::VectorXd& x_b, RngStream& rng) {
    if (!problem_->in_domain(x_a) || !problem_->in_domain(x_b)) {
      throw DomainError("oracle query outside the mu0-neighbourhood of the simplex (mu0=" +
                        std::to_string(problem_->constants().mu0) + "); reduce mu or tau");
    }
    const Eigen::VectorXd eta = problem_->sample_noise(rng);
    const double fa = problem_->value(x_a, eta);
    const double fb = problem_->value(x_b, eta);
    OracleResponse r;
    r.value_a = channel_.perturb(fa, rng);
    r.value_b = channel_.perturb(fb, rng);
    r.noise_a = r.value_a - fa;
    r.noise_b = r.value_b - fb;
    r.eta_id = draws_++;
    r.calls_charged = 2;
    calls_ += 2;
    return r;
  }

  std::int64_t call_count() const { return calls_; }
  const StochasticProblem& problem() const { return *problem_; }
  const NoiseChannel& channel() const { return channel_; }

 private:
  const StochasticProblem* problem_;
  NoiseChannel channel_;
  std::int64_t calls_ = 0;
  std::uint64_t draws_ = 0;
};

inline std::int64_t call_count(const Oracle& oracle) { return oracle.call_count(); }

}  // namespace zomd
