#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spinsim/dipolar.hpp"
#include "spinsim/zeeman.hpp"

namespace spinsim {

// Host crystal description used for site densities and lattice-placed baths.
struct Lattice {
  Eigen::Matrix3d cell = Eigen::Matrix3d::Zero();  // columns = lattice vectors [m]
  std::vector<Eigen::Vector3d> fractional_sites;

  double cell_volume() const;
  double site_density() const;  // sites per m^3
};

// Plain-text format: comment lines start with '#';
//   lattice_vector ax ay az   (three of these, meters)
//   site fx fy fz             (fractional coordinates, one per site)
Lattice load_lattice(const std::string& path);

enum class Placement { Continuum, Lattice };

// One off-resonant bath species. The species couples to the probe through the
// dipolar field of its moment; flip-flops with the probe are suppressed by the
// detuning so only the probe-frequency shift survives.
struct BathSpecies {
  std::string name;
  double concentration = 1.0;  // occupied fraction of host sites
  // either a g-tensor (electron-like species, moment = (mu_B/2) uz of its own
  // Zeeman frame) or a fixed scalar moment along the field (nuclear-like)
  std::optional<GTensor> g;
  double moment = 0.0;  // [J/T], used when g is not set
  Placement placement = Placement::Continuum;
};

struct EnsembleSpec {
  double concentration = 0.0;  // resonant dopant fraction of host sites, in (0, 1]
  double site_density = 0.0;   // host sites [m^-3]
  double eta = 1.0;            // pulse-fidelity factor applied to the concentration
  std::vector<BathSpecies> bath_species;
  std::optional<Lattice> lattice;

  int bath_spins = 800;     // expected spins inside the sampling sphere
  int realizations = 2000;  // Monte Carlo bath configurations
  std::uint64_t seed = 1;

  double n_eff() const { return eta * concentration * site_density; }
  void validate() const;
};

enum class DecayShape { Exponential, Gaussian };

struct CoherencePrediction {
  double fwhm = 0.0;  // [Hz]
  double T2 = 0.0;    // [s]
  double T1_ff = std::numeric_limits<double>::infinity();  // [s]
  DecayShape decay_shape = DecayShape::Exponential;
  bool lifetime_cap_applied = false;
  // the flip-flop estimate comes from a substitute model, not the paper
  bool t1_model_approximate = true;
};

// fwhm = (2 pi / (9 sqrt(3))) mu_0 h gamma_eff^2 n_eff
double dipolar_linewidth(double gamma_eff, double n_eff);

// T2 = min(1/(pi fwhm), 2 T1_ff)
CoherencePrediction coherence_from_linewidth(
    double fwhm, double T1_ff = std::numeric_limits<double>::infinity());

// Monte Carlo T2 from the redistributed sigma_z-sigma_z couplings: Poisson
// bath around a probe spin, random +-z states, Lorentzian width of the shift
// distribution taken as the interquartile range. Converges to
// dipolar_linewidth at c = 1.
CoherencePrediction decoupled_coherence(const ZeemanFrame& frame, double c,
                                        const EnsembleSpec& spec);

// Substitute flip-flop lifetime: pair flip-flop rates gated by spectral
// overlap with the inhomogeneous line. Approximate model; only scaling
// behavior is contractual.
double flip_flop_time(const ZeemanFrame& frame, double c, const EnsembleSpec& spec,
                      double inhomogeneous_fwhm);

struct SpeciesBroadening {
  std::string name;
  double fwhm = 0.0;  // [Hz]
};

// Frequency-shift fwhm on the probe from each off-resonant species.
std::vector<SpeciesBroadening> offresonant_broadening(const EnsembleSpec& spec,
                                                      const ZeemanFrame& frame,
                                                      int realizations);

// Average pi-rotation probability over a Lorentzian dopant line of the given
// fwhm, for Rabi frequency omega [rad/s] and pulse length t_p.
double pi_pulse_fidelity(double omega, double inhomogeneous_fwhm, double t_p);

// n_eff = eta * n
double effective_concentration(double n, double eta);

}  // namespace spinsim
