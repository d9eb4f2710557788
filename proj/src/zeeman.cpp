#include "spinsim/zeeman.hpp"

#include <cmath>
#include <stdexcept>

#include "spinsim/constants.hpp"

namespace spinsim {

GTensor::GTensor(double x, double y, double z) : gx(x), gy(y), gz(z) {
  if (!(gx > 0.0) || !(gy > 0.0) || !(gz > 0.0) || !std::isfinite(gx) ||
      !std::isfinite(gy) || !std::isfinite(gz)) {
    throw std::invalid_argument("GTensor: principal values must be positive and finite");
  }
}

FieldOrientation::FieldOrientation(const Eigen::Vector3d& direction, double tesla)
    : b_hat(direction), field_tesla(tesla) {
  const double n = b_hat.norm();
  if (!std::isfinite(n) || n == 0.0) {
    throw std::invalid_argument("FieldOrientation: zero or non-finite direction");
  }
  if (std::abs(n - 1.0) > 1e-12) {
    if (std::abs(n - 1.0) > 1e-6) {
      throw std::invalid_argument("FieldOrientation: direction is not a unit vector");
    }
    b_hat /= n;
  }
}

Eigen::Vector3d effective_field_axis(const GTensor& g, const FieldOrientation& b) {
  const Eigen::Vector3d v = g.principal().cwiseProduct(b.b_hat);
  const double n = v.norm();
  // positive g and unit b cannot annihilate all components
  if (n <= 0.0) throw std::logic_error("effective_field_axis: degenerate g-weighted field");
  return v / n;
}

double effective_g(const GTensor& g, const FieldOrientation& b) {
  return g.principal().cwiseProduct(b.b_hat).norm();
}

double effective_gamma(const GTensor& g, const FieldOrientation& b) {
  const Eigen::Vector3d g2 = g.principal().cwiseAbs2();
  const Eigen::Vector3d b2 = b.b_hat.cwiseAbs2();
  const double num = g2.cwiseAbs2().dot(b2);
  const double den = g2.dot(b2);
  return constants::mu_B / constants::h * std::sqrt(num / den);
}

ZeemanFrame zeeman_frame(const GTensor& g, const FieldOrientation& b) {
  ZeemanFrame f;
  f.b_hat = b.b_hat;
  f.b_eff = effective_field_axis(g, b);
  f.g_eff = effective_g(g, b);
  f.gamma_eff = effective_gamma(g, b);

  f.theta = std::acos(std::clamp(f.b_eff.z(), -1.0, 1.0));
  const double s = std::hypot(f.b_eff.x(), f.b_eff.y());
  f.phi = (s < 1e-300) ? 0.0 : std::atan2(f.b_eff.y(), f.b_eff.x());

  const double ct2 = std::cos(f.theta / 2), st2 = std::sin(f.theta / 2);
  const double c2 = ct2 * ct2, s2 = st2 * st2;
  const double sT = std::sin(f.theta), cT = std::cos(f.theta);
  const double c2P = std::cos(2 * f.phi), s2P = std::sin(2 * f.phi);
  const double cP = std::cos(f.phi), sP = std::sin(f.phi);

  f.ux = {g.gx * (c2 - s2 * c2P), -g.gy * s2 * s2P, -g.gz * sT * cP};
  f.uy = {-g.gx * s2 * s2P, g.gy * (c2 + s2 * c2P), -g.gz * sT * sP};
  f.uz = {g.gx * sT * cP, g.gy * sT * sP, g.gz * cT};
  return f;
}

}  // namespace spinsim
