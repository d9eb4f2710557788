#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "spinsim/sequence.hpp"
#include "spinsim/zeeman.hpp"

namespace spinsim {

// Small cluster of identical resonant spins at fixed positions (g eigenbasis
// coordinates). State dimension 2^N is capped at 4096.
struct ClusterSpec {
  std::vector<Eigen::Vector3d> positions;  // [m]
  ZeemanFrame frame;
  std::vector<double> detuning_hz;  // per-spin sigma_z disorder; empty = none
  int probe = 0;                    // spin whose coherence is read out
  double min_separation = 3.0e-10;

  int size() const { return static_cast<int>(positions.size()); }
  void validate() const;
};

// H = sum_{i<j} [ J_S (sx sx + sy sy) + J_I sz sz ] + sum_i (h d_i / 2) sz,
// in joules. Note J_S (sx sx + sy sy) = 2 J_S (s+ s- + s- s+).
Eigen::MatrixXcd build_cluster_hamiltonian(const ClusterSpec& spec);

enum class InitialState {
  ProbeXBathThermal,  // probe on +x, exact average over all bath sigma_z states
  AllX,               // every spin on +x
};

struct SimResult {
  std::vector<double> time;       // cycle boundaries, t = 0 included
  std::vector<double> coherence;  // probe <sigma . e> with the net cycle
                                  // Clifford compensated in the readout axis
};

// Exact piecewise-unitary propagation. With ideal_pulses the pulses are
// instantaneous global rotations; otherwise each pulse evolves under
// H + (hbar Omega / 2) sum_i n.sigma_i for its stated duration.
SimResult simulate_sequence(const ClusterSpec& spec, const PulseSequence& seq,
                            InitialState initial, bool ideal_pulses = true);

// Same cluster evolved under the static average Hamiltonian that the
// sequence's toggling frame predicts (redistributed couplings, disorder scaled
// by the signed z dwell fraction), sampled at the same cycle boundaries.
SimResult simulate_average_hamiltonian(const ClusterSpec& spec,
                                       const PulseSequence& seq);

struct AhtComparison {
  std::string sequence;
  double exact_curvature = 0.0;  // quadratic short-time decay coefficient [s^-2]
  double aht_curvature = 0.0;
  double ratio = 0.0;            // exact / predicted
  bool fit_ok = false;
  bool higher_order_flagged = false;  // |ratio - 1| > 0.2
};

std::vector<AhtComparison> compare_aht_vs_exact(
    const ClusterSpec& spec, const std::vector<PulseSequence>& seqs);

// Ornstein-Uhlenbeck frequency noise on a single spin.
struct NoiseModel {
  double amplitude = 0.0;         // rms frequency excursion [rad/s]
  double correlation_time = 0.0;  // [s]
  void validate() const;
};

enum class ShapeClass { Exponential, Gaussian, Ambiguous };
const char* to_string(ShapeClass s);

struct NoiseDecayCurve {
  std::vector<double> time;
  std::vector<double> coherence;
  std::vector<double> stderr_mean;
  double T2 = 0.0;        // from the stretched-exponential fit
  double stretch = 0.0;   // fitted exponent of exp(-(t/T2)^stretch)
  ShapeClass shape = ShapeClass::Ambiguous;
};

// Averaged coherence of one spin dephasing under exactly-sampled OU noise,
// with the phase sign toggled by the sequence's ideal toggling frame. The
// sequence acts as a shape template: its timing is rescaled so the total
// duration sweeps a grid around the expected T2.
NoiseDecayCurve ou_noise_dephasing(const NoiseModel& noise,
                                   const PulseSequence& proto, int trajectories,
                                   std::uint64_t seed);

struct NoiseScalingResult {
  std::vector<int> n_pi;
  std::vector<double> T2;
  double exponent = 0.0;  // fitted gamma in T2 ~ n_pi^gamma
  ShapeClass shape = ShapeClass::Ambiguous;
};

// T2 versus pulse number for the XY-4 family (n_pi must be multiples of 4).
NoiseScalingResult ou_noise_scaling(const NoiseModel& noise,
                                    const std::vector<int>& n_pi_values,
                                    int trajectories, std::uint64_t seed);

}  // namespace spinsim
