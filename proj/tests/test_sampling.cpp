#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "zomd/sampling.hpp"
#include "zomd/stats.hpp"
#include "zomd/verify.hpp"

namespace {

using zomd::Direction;
using zomd::DirectionScheme;
using zomd::RngStream;
using zomd::sample_direction;

const DirectionScheme kAllSchemes[] = {DirectionScheme::L1Sphere, DirectionScheme::L2Sphere,
                                       DirectionScheme::LInfSphere, DirectionScheme::LInfBall,
                                       DirectionScheme::Rademacher, DirectionScheme::Coordinate,
                                       DirectionScheme::L1Ball,     DirectionScheme::L2Ball};

void expect_scheme_invariant(const Direction& d) {
  const Eigen::VectorXd& e = d.coords;
  const double n = static_cast<double>(e.size());
  switch (d.scheme) {
    case DirectionScheme::L1Sphere: EXPECT_NEAR(e.lpNorm<1>(), 1.0, 1e-12); break;
    case DirectionScheme::L2Sphere: EXPECT_NEAR(e.norm(), 1.0, 1e-12); break;
    case DirectionScheme::LInfSphere: EXPECT_NEAR(e.lpNorm<Eigen::Infinity>(), 1.0, 1e-12); break;
    case DirectionScheme::LInfBall: EXPECT_LE(e.lpNorm<Eigen::Infinity>(), 1.0); break;
    case DirectionScheme::Rademacher:
      for (Eigen::Index i = 0; i < e.size(); ++i) EXPECT_TRUE(e[i] == 1.0 || e[i] == -1.0);
      break;
    case DirectionScheme::Coordinate: {
      int nonzero = 0;
      for (Eigen::Index i = 0; i < e.size(); ++i) {
        if (e[i] != 0.0) {
          ++nonzero;
          EXPECT_EQ(e[i], std::sqrt(n));
        }
      }
      EXPECT_EQ(nonzero, 1);
      break;
    }
    case DirectionScheme::L1Ball: EXPECT_LE(e.lpNorm<1>(), 1.0 + 1e-12); break;
    case DirectionScheme::L2Ball: EXPECT_LE(e.norm(), 1.0 + 1e-12); break;
  }
}

TEST(SampleDirection, NormInvariantsHoldForEveryDraw) {
  RngStream rng(11);
  for (DirectionScheme s : kAllSchemes) {
    for (std::size_t n : {2u, 3u, 7u, 64u}) {
      for (int k = 0; k < 500; ++k) {
        const Direction d = sample_direction(s, n, rng);
        ASSERT_EQ(d.coords.size(), static_cast<Eigen::Index>(n));
        ASSERT_EQ(d.scheme, s);
        expect_scheme_invariant(d);
      }
    }
  }
}

TEST(SampleDirection, RejectsDimensionBelowTwo) {
  RngStream rng(1);
  for (DirectionScheme s : kAllSchemes) {
    EXPECT_THROW(sample_direction(s, 1, rng), zomd::InvalidDimension);
    EXPECT_THROW(sample_direction(s, 0, rng), zomd::InvalidDimension);
  }
}

TEST(SampleDirection, DeterministicGivenStream) {
  for (DirectionScheme s : kAllSchemes) {
    RngStream a(99, 3), b(99, 3);
    for (int k = 0; k < 50; ++k) {
      ASSERT_EQ(sample_direction(s, 5, a).coords, sample_direction(s, 5, b).coords);
    }
  }
}

TEST(SampleDirection, CoordinateHasSquaredNormN) {
  RngStream rng(4);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(sample_direction(DirectionScheme::Coordinate, 4, rng).coords.squaredNorm(), 4.0);
}

// |e| for e uniform on the l1 sphere is flat-Dirichlet: E|e_i| = 1/n and
// E[e_i^2] = 2 / (n (n + 1)).
TEST(SampleDirection, L1SphereMatchesDirichletMoments) {
  RngStream rng(5);
  const std::size_t n = 5;
  zomd::RunningMean abs_first, sq_first;
  for (int k = 0; k < 200000; ++k) {
    const Eigen::VectorXd e = sample_direction(DirectionScheme::L1Sphere, n, rng).coords;
    abs_first.add(std::fabs(e[0]));
    sq_first.add(e[0] * e[0]);
  }
  EXPECT_NEAR(abs_first.mean(), 1.0 / n, 4 * abs_first.std_error());
  EXPECT_NEAR(sq_first.mean(), 2.0 / (n * (n + 1.0)), 4 * sq_first.std_error());
}

TEST(SampleDirection, BallRadiiFollowPowerLaw) {
  // P(||e|| <= r) = r^n  =>  E||e|| = n / (n + 1)
  RngStream rng(6);
  const std::size_t n = 4;
  zomd::RunningMean r1, r2;
  for (int k = 0; k < 100000; ++k) {
    r1.add(sample_direction(DirectionScheme::L1Ball, n, rng).coords.lpNorm<1>());
    r2.add(sample_direction(DirectionScheme::L2Ball, n, rng).coords.norm());
  }
  EXPECT_NEAR(r1.mean(), 0.8, 4 * r1.std_error());
  EXPECT_NEAR(r2.mean(), 0.8, 4 * r2.std_error());
}

TEST(SampleDirection, LInfSphereFacesAreEquallyLikely) {
  RngStream rng(7);
  const std::size_t n = 3;
  std::vector<int> faces(2 * n, 0);
  const int draws = 60000;
  for (int k = 0; k < draws; ++k) {
    const Eigen::VectorXd e = sample_direction(DirectionScheme::LInfSphere, n, rng).coords;
    const Eigen::Index i = zomd::argmax_abs(e);
    ++faces[2 * static_cast<std::size_t>(i) + (e[i] > 0 ? 0 : 1)];
  }
  double chi2 = 0.0;
  const double expected = draws / (2.0 * n);
  for (int c : faces) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 20.5);  // chi-square, 5 dof, 99.9%
}

TEST(SampleDirection, RademacherOuterProductIsIdentity) {
  RngStream rng(8);
  const auto m = zomd::measure_outer_product(DirectionScheme::Rademacher, 4, 1000000, rng);
  EXPECT_LE((m.mean - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 5e-3);
}

TEST(SampleDirection, L2SphereSecondMomentIsIdentityOverN) {
  RngStream rng(9);
  for (std::size_t n : {4u, 16u}) {
    const auto m = zomd::measure_outer_product(DirectionScheme::L2Sphere, n, 1000000, rng);
    const auto dim = static_cast<Eigen::Index>(n);
    const double frob = (m.mean - Eigen::MatrixXd::Identity(dim, dim) / static_cast<double>(n)).norm();
    EXPECT_LE(frob, 3.0 * m.std_error.norm()) << "n=" << n;
  }
}

TEST(SampleDirection, L2SphereInfNormMomentBelowBound) {
  RngStream rng(10);
  const zomd::Estimate e = zomd::measure_l2_sphere_norm_moment(16, 0, 1000000, rng);
  EXPECT_LE(e.value, 4.0 * std::log(16.0) / 16.0);
  EXPECT_NEAR(4.0 * std::log(16.0) / 16.0, 0.693, 5e-4);
}

TEST(SampleDirection, L2SphereNormMomentBounds) {
  RngStream rng(12);
  for (std::size_t n : {4u, 16u, 64u}) {
    for (int q : {2, 4, 0}) {
      const zomd::Estimate e = zomd::measure_l2_sphere_norm_moment(n, q, 100000, rng);
      EXPECT_LE(e.value, zomd::l2_sphere_norm_moment_bound(n, q) + 3 * e.std_error + 1e-12)
          << "n=" << n << " q=" << q;
    }
  }
}

TEST(SampleDirection, CubeMassConcentratesAtBoundary) {
  RngStream rng(13);
  double previous = 0.0;
  for (std::size_t n : {2u, 8u, 32u, 128u}) {
    zomd::RunningMean near_boundary;
    for (int k = 0; k < 20000; ++k) {
      near_boundary.add(sample_direction(DirectionScheme::LInfBall, n, rng).coords.lpNorm<Eigen::Infinity>() >= 0.9);
    }
    const double exact = 1.0 - std::pow(0.9, static_cast<double>(n));
    EXPECT_NEAR(near_boundary.mean(), exact, 4 * std::sqrt(exact * (1 - exact) / 20000.0) + 1e-9);
    EXPECT_GE(near_boundary.mean(), previous);
    previous = near_boundary.mean();
  }
  EXPECT_GT(previous, 0.99);
}

TEST(SurfaceNormal, L1SignPatternNormalised) {
  const Eigen::VectorXd n = zomd::surface_normal({Eigen::Vector2d(0.5, -0.5), DirectionScheme::L1Sphere});
  EXPECT_NEAR(n[0], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(n[1], -1.0 / std::sqrt(2.0), 1e-15);
}

TEST(SurfaceNormal, L1SignOfZeroIsPositive) {
  const Eigen::VectorXd n = zomd::surface_normal({Eigen::Vector3d(0.0, -0.5, 0.5), DirectionScheme::L1Sphere});
  EXPECT_GT(n[0], 0.0);
  EXPECT_NEAR(n.norm(), 1.0, 1e-15);
}

TEST(SurfaceNormal, L2IsIdentity) {
  const Eigen::Vector3d e(0, 1, 0);
  EXPECT_EQ(zomd::surface_normal({e, DirectionScheme::L2Sphere}), Eigen::VectorXd(e));
}

TEST(SurfaceNormal, LInfIsSignedFaceNormal) {
  // outward normal of the face e_2 = -1
  const Eigen::VectorXd n = zomd::surface_normal({Eigen::Vector3d(0.3, -1.0, 0.7), DirectionScheme::LInfSphere});
  EXPECT_EQ(n, Eigen::VectorXd(Eigen::Vector3d(0, -1, 0)));
  const Eigen::VectorXd m = zomd::surface_normal({Eigen::Vector3d(0.3, 0.2, 1.0), DirectionScheme::LInfSphere});
  EXPECT_EQ(m, Eigen::VectorXd(Eigen::Vector3d(0, 0, 1)));
}

TEST(SurfaceNormal, LInfTieBreaksToSmallestIndex) {
  const Eigen::VectorXd n = zomd::surface_normal({Eigen::Vector3d(0.2, 1.0, -1.0), DirectionScheme::LInfSphere});
  EXPECT_EQ(n, Eigen::VectorXd(Eigen::Vector3d(0, 1, 0)));
}

TEST(SurfaceNormal, RejectsNonSphereSchemes) {
  EXPECT_THROW(zomd::surface_normal({Eigen::Vector2d(1, 1), DirectionScheme::Rademacher}), std::invalid_argument);
  EXPECT_THROW(zomd::surface_normal({Eigen::Vector2d(1, 0), DirectionScheme::Coordinate}), std::invalid_argument);
}

}  // namespace
