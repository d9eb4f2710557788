#pragma once

#include <Eigen/Dense>

#include "spinsim/zeeman.hpp"

namespace spinsim {

// Nearest-neighbour Y-Y distance in YSO; pairs closer than this are treated
// as unphysical overlap unless the caller overrides the minimum.
inline constexpr double kDefaultMinSeparation = 3.0e-10;  // [m]

// Relative geometry of one resonant pair, in the g eigenbasis.
struct PairGeometry {
  double r = 0.0;          // separation [m]
  Eigen::Vector3d r_hat;   // unit vector between the spins
  double delta = 0.0;      // angle between uz direction and r_hat [rad], cached

  PairGeometry(double separation, const Eigen::Vector3d& direction,
               const ZeemanFrame& frame);
};

// Secular dipolar coefficients for a like pair (same site, same Zeeman frame).
struct DipolarCoupling {
  double J_S = 0.0;    // flip-flop [J]
  double J_I = 0.0;    // spectral-diffusion / ID [J]
  double alpha = 0.0;  // isotropic (Heisenberg) component = (2 J_S + J_I)/3 [J]
};

// Coefficients from the moment direction vectors:
//   2 J_S = (mu0 / 4 pi r^3)(mu_B/2)^2 [ux.ux + uy.uy - 3(ux.r)^2 - 3(uy.r)^2]
//   J_I   = (mu0 / 4 pi r^3)(mu_B/2)^2 [uz.uz - 3(uz.r)^2]
DipolarCoupling pair_coupling(const ZeemanFrame& frame, const PairGeometry& geom,
                              double min_separation = kDefaultMinSeparation);

// Isotropic component directly from the g-tensor and pair direction:
//   alpha = (mu0 mu_B^2 / 48 pi r^3) * sum_i g_i^2 (1 - 3 r_hat_i^2)
// which equals (2 J_S + J_I)/3 from pair_coupling.
double isotropic_component(const GTensor& g, const PairGeometry& geom,
                           double min_separation = kDefaultMinSeparation);

}  // namespace spinsim
