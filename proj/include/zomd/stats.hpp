#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace zomd {

/// Welford accumulator for a scalar sample.
class RunningMean {
 public:
  void add(double v) {
    ++count_;
    const double d = v - mean_;
    mean_ += d / static_cast<double>(count_);
    m2_ += d * (v - mean_);
  }

  std::int64_t count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }
  /// Standard error of the mean.
  double std_error() const {
    return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
  }

 private:
  std::int64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Componentwise Welford accumulator for vectors of a fixed length.
class VectorRunningMean {
 public:
  explicit VectorRunningMean(Eigen::Index n)
      : mean_(Eigen::VectorXd::Zero(n)), m2_(Eigen::VectorXd::Zero(n)) {}

  void add(const Eigen::VectorXd& v) {
    ++count_;
    const Eigen::VectorXd d = v - mean_;
    mean_ += d / static_cast<double>(count_);
    m2_ += d.cwiseProduct(v - mean_);
  }

  std::int64_t count() const { return count_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  Eigen::VectorXd std_error() const {
    if (count_ < 2) return Eigen::VectorXd::Zero(mean_.size());
    const double c = static_cast<double>(count_);
    return (m2_ / ((c - 1.0) * c)).cwiseSqrt();
  }

 private:
  std::int64_t count_ = 0;
  Eigen::VectorXd mean_;
  Eigen::VectorXd m2_;
};

/// Mean and its Monte-Carlo standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct VectorEstimate {
  Eigen::VectorXd value;
  Eigen::VectorXd std_error;
};

}  // namespace zomd
