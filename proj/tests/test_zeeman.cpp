#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spinsim/constants.hpp"
#include "spinsim/rng.hpp"
#include "spinsim/zeeman.hpp"

using namespace spinsim;
using namespace spinsim::constants;

namespace {
Eigen::Vector3d random_unit(Rng& rng) {
  Eigen::Vector3d v;
  do {
    v = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
  } while (v.norm() < 1e-3 || v.norm() > 1.0);
  return v.normalized();
}
}  // namespace

TEST_CASE("g-tensor validation") {
  CHECK_THROWS_AS(GTensor(0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GTensor(1.0, -2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GTensor(1.0, 1.0, std::nan("")), std::invalid_argument);
  CHECK_NOTHROW(GTensor(1.6, 4.2, 14.65));
}

TEST_CASE("field orientation must be a unit vector") {
  CHECK_THROWS_AS(FieldOrientation(Eigen::Vector3d(1, 1, 0)), std::invalid_argument);
  CHECK_THROWS_AS(FieldOrientation(Eigen::Vector3d::Zero()), std::invalid_argument);
  CHECK_NOTHROW(FieldOrientation(Eigen::Vector3d(0, 0, 1 + 1e-8)));
}

TEST_CASE("effective field axis") {
  Rng rng(11);
  GTensor iso(2, 2, 2);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector3d b = random_unit(rng);
    CHECK((effective_field_axis(iso, FieldOrientation(b)) - b).norm() < 1e-12);
  }
  GTensor g(1, 2, 3);
  CHECK((effective_field_axis(g, FieldOrientation({0, 0, 1})) -
         Eigen::Vector3d(0, 0, 1))
            .norm() < 1e-12);
  const Eigen::Vector3d diag = Eigen::Vector3d(1, 1, 1).normalized();
  const Eigen::Vector3d expect = Eigen::Vector3d(1, 2, 3) / std::sqrt(14.0);
  CHECK((effective_field_axis(g, FieldOrientation(diag)) - expect).norm() < 1e-12);
}

TEST_CASE("effective g-factor") {
  GTensor g(1, 2, 3);
  CHECK(effective_g(GTensor(2, 2, 2), FieldOrientation({0, 1, 0})) == doctest::Approx(2.0));
  CHECK(effective_g(g, FieldOrientation({0, 0, 1})) == doctest::Approx(3.0));
  CHECK(effective_g(g, FieldOrientation(Eigen::Vector3d(1, 1, 1).normalized())) ==
        doctest::Approx(std::sqrt(14.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("effective gyromagnetic ratio") {
  const double unit = mu_B / h;
  GTensor g(1, 2, 3);
  CHECK(effective_gamma(GTensor(2, 2, 2), FieldOrientation({1, 0, 0})) ==
        doctest::Approx(2 * unit));
  CHECK(effective_gamma(g, FieldOrientation({0, 0, 1})) == doctest::Approx(3 * unit));
  // sum g^4 b^2 = 98/3, sum g^2 b^2 = 14/3
  CHECK(effective_gamma(g, FieldOrientation(Eigen::Vector3d(1, 1, 1).normalized())) ==
        doctest::Approx(std::sqrt(7.0) * unit).epsilon(1e-12));
}

TEST_CASE("frame at the theta = 0 pole") {
  GTensor g(1, 2, 3);
  const auto f = zeeman_frame(g, FieldOrientation({0, 0, 1}));
  CHECK(f.theta == doctest::Approx(0.0));
  CHECK(f.phi == doctest::Approx(0.0));
  CHECK((f.ux - Eigen::Vector3d(1, 0, 0)).norm() < 1e-12);
  CHECK((f.uy - Eigen::Vector3d(0, 2, 0)).norm() < 1e-12);
  CHECK((f.uz - Eigen::Vector3d(0, 0, 3)).norm() < 1e-12);
}

TEST_CASE("isotropic frame gives an orthogonal triad") {
  Rng rng(5);
  GTensor iso(2, 2, 2);
  for (int i = 0; i < 20; ++i) {
    const auto f = zeeman_frame(iso, FieldOrientation(random_unit(rng)));
    CHECK(std::abs(f.ux.dot(f.uy)) < 1e-10);
    CHECK(std::abs(f.uy.dot(f.uz)) < 1e-10);
    CHECK(std::abs(f.ux.dot(f.uz)) < 1e-10);
    CHECK(f.ux.norm() == doctest::Approx(2.0));
    CHECK(f.uy.norm() == doctest::Approx(2.0));
    CHECK(f.uz.norm() == doctest::Approx(2.0));
  }
}

TEST_CASE("frame invariants over random inputs") {
  Rng rng(77);
  for (int i = 0; i < 2000; ++i) {
    const GTensor g(rng.uniform(0.1, 15), rng.uniform(0.1, 15), rng.uniform(0.1, 15));
    const FieldOrientation b(random_unit(rng));
    const auto f = zeeman_frame(g, b);
    CHECK(std::abs(f.b_eff.norm() - 1.0) < 1e-12);
    CHECK(std::abs(b.b_hat.dot(f.ux)) < 1e-10 * f.g_eff);
    CHECK(std::abs(b.b_hat.dot(f.uy)) < 1e-10 * f.g_eff);
    CHECK(b.b_hat.dot(f.uz) == doctest::Approx(f.g_eff).epsilon(1e-10));
    // Eq-form versus projection-form gyromagnetic ratio
    const double proj = mu_B / h * (g.matrix() * f.b_eff).norm();
    CHECK(f.gamma_eff == doctest::Approx(proj).epsilon(1e-10));
    // bounds
    const double lo = std::min({g.gx, g.gy, g.gz});
    const double hi = std::max({g.gx, g.gy, g.gz});
    CHECK(f.g_eff >= lo - 1e-12);
    CHECK(f.g_eff <= hi + 1e-12);
    CHECK(f.gamma_eff * h / mu_B >= lo - 1e-12);
    CHECK(f.gamma_eff * h / mu_B <= hi + 1e-12);
    // moment closure: sum_a u^a (u^a)^T = G^2
    Eigen::Matrix3d sum = f.ux * f.ux.transpose() + f.uy * f.uy.transpose() +
                          f.uz * f.uz.transpose();
    CHECK((sum - g.matrix() * g.matrix()).norm() < 1e-8 * hi * hi);
  }
}

TEST_CASE("continuity away from the pole") {
  GTensor g(1.6, 4.2, 14.65);
  const Eigen::Vector3d b0 = Eigen::Vector3d(0.3, -0.5, 0.8).normalized();
  const auto f0 = zeeman_frame(g, FieldOrientation(b0));
  const double eps = 1e-8;
  const Eigen::Vector3d b1 = (b0 + eps * Eigen::Vector3d(1, 1, 0)).normalized();
  const auto f1 = zeeman_frame(g, FieldOrientation(b1));
  CHECK((f0.uz - f1.uz).norm() < 1e-5);
  CHECK(std::abs(f0.g_eff - f1.g_eff) < 1e-5);
}
