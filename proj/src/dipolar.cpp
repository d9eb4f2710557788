#include "spinsim/dipolar.hpp"

#include <cmath>
#include <stdexcept>

#include "spinsim/constants.hpp"

namespace spinsim {

namespace {
void check_separation(double r, double min_separation) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("pair separation must be positive and finite");
  }
  if (r < min_separation) {
    throw std::invalid_argument("pair separation below minimum lattice distance");
  }
}
}  // namespace

PairGeometry::PairGeometry(double separation, const Eigen::Vector3d& direction,
                           const ZeemanFrame& frame)
    : r(separation), r_hat(direction) {
  const double n = r_hat.norm();
  if (std::abs(n - 1.0) > 1e-12) {
    if (n == 0.0 || !std::isfinite(n)) {
      throw std::invalid_argument("PairGeometry: zero direction");
    }
    r_hat /= n;
  }
  if (!(r > 0.0)) throw std::invalid_argument("PairGeometry: r must be > 0");
  // delta is measured from the direction of the sigma_z moment component
  const Eigen::Vector3d uz_hat = frame.uz.normalized();
  delta = std::acos(std::clamp(uz_hat.dot(r_hat), -1.0, 1.0));
}

DipolarCoupling pair_coupling(const ZeemanFrame& frame, const PairGeometry& geom,
                              double min_separation) {
  check_separation(geom.r, min_separation);
  using namespace constants;
  const double pref =
      mu_0 / (4.0 * pi * geom.r * geom.r * geom.r) * (mu_B / 2.0) * (mu_B / 2.0);
  const auto& r = geom.r_hat;
  const double xr = frame.ux.dot(r), yr = frame.uy.dot(r), zr = frame.uz.dot(r);
  DipolarCoupling c;
  c.J_S = 0.5 * pref *
          (frame.ux.squaredNorm() + frame.uy.squaredNorm() - 3.0 * xr * xr -
           3.0 * yr * yr);
  c.J_I = pref * (frame.uz.squaredNorm() - 3.0 * zr * zr);
  c.alpha = (2.0 * c.J_S + c.J_I) / 3.0;
  return c;
}

double isotropic_component(const GTensor& g, const PairGeometry& geom,
                           double min_separation) {
  check_separation(geom.r, min_separation);
  using namespace constants;
  const Eigen::Vector3d g2 = g.principal().cwiseAbs2();
  const Eigen::Vector3d r2 = geom.r_hat.cwiseAbs2();
  const double angular = g2.sum() - 3.0 * g2.dot(r2);
  return mu_0 * mu_B * mu_B / (48.0 * pi * geom.r * geom.r * geom.r) * angular;
}

}  // namespace spinsim
