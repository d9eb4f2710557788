#pragma once

#include <Eigen/Dense>

namespace spinsim {

// Diagonal g-tensor in its eigenbasis. All frame mathematics in this library
// works in this basis; crystal-frame inputs are rotated in by the config
// layer before they get here.
struct GTensor {
  double gx = 2.0, gy = 2.0, gz = 2.0;

  GTensor() = default;
  GTensor(double x, double y, double z);

  Eigen::Vector3d principal() const { return {gx, gy, gz}; }
  Eigen::Matrix3d matrix() const { return principal().asDiagonal(); }
};

// Static-field direction (unit vector) in the g-tensor eigenbasis, plus an
// optional field magnitude for quantities that need it.
struct FieldOrientation {
  Eigen::Vector3d b_hat;
  double field_tesla = 0.0;  // 0 = unused; ratios don't need it

  explicit FieldOrientation(const Eigen::Vector3d& direction, double tesla = 0.0);
};

// Effective precession frame of the Zeeman Hamiltonian for one (g, B) pair:
// the effective field axis, the splitting g-factor, the gyromagnetic ratio
// that enters dipolar broadening, and the three moment direction vectors
// u^x, u^y, u^z that decompose the magnetic moment onto the qubit Paulis.
struct ZeemanFrame {
  Eigen::Vector3d b_eff;   // unit precession axis, g eigenbasis
  double g_eff = 0.0;      // dimensionless Zeeman-splitting factor
  double gamma_eff = 0.0;  // [Hz/T], g^4-weighted ratio for dipolar strength
  double theta = 0.0;      // spherical angles of b_eff
  double phi = 0.0;
  Eigen::Vector3d ux, uy, uz;
  Eigen::Vector3d b_hat;   // original field unit vector, kept for invariants
};

// b_eff = normalize(gx*bx, gy*by, gz*bz)
Eigen::Vector3d effective_field_axis(const GTensor& g, const FieldOrientation& b);

// sqrt((gx bx)^2 + (gy by)^2 + (gz bz)^2) — sets the splitting ±(1/2) mu_B g_eff B
double effective_g(const GTensor& g, const FieldOrientation& b);

// (mu_B/h) * sqrt(sum g_i^4 b_i^2 / sum g_i^2 b_i^2) [Hz/T]
double effective_gamma(const GTensor& g, const FieldOrientation& b);

// Full frame. At the theta = 0 pole phi is fixed to 0 by convention.
ZeemanFrame zeeman_frame(const GTensor& g, const FieldOrientation& b);

}  // namespace spinsim
