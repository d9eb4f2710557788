#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spinsim/ensemble.hpp"
#include "spinsim/exactsim.hpp"
#include "spinsim/sequence.hpp"
#include "spinsim/zeeman.hpp"

namespace spinsim {

// Config-level failures (bad file, bad units, missing keys). The CLI maps
// these to exit code 1; numerical failures map to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unit families accepted in config strings. Plain JSON numbers are read as
// the SI base unit of the family.
enum class UnitKind { Time, Frequency, Field, Length, Angle, Fraction, Density };

// "33 ns" -> 3.3e-8 and so on; throws ConfigError on unknown suffixes.
double parse_quantity(const nlohmann::json& value, UnitKind kind,
                      const std::string& key);

struct SweepSpec {
  Eigen::Vector3d from;  // lab-frame unit vectors; great-circle path
  Eigen::Vector3d to;
  int steps = 1;
};

struct SequenceConfig {
  SequenceKind kind = SequenceKind::HahnEcho;
  SequenceParams params;
  std::string label;
};

struct FidelityConfig {
  double omega = 0.0;  // Rabi [rad/s]
  double inhomogeneous_fwhm = 0.0;
  double t_p = 0.0;
};

struct NoiseConfig {
  NoiseModel model;
  std::vector<int> n_pi{4, 8, 16, 32, 64};
  int trajectories = 1000;
};

struct ClusterConfig {
  std::vector<Eigen::Vector3d> positions;
  std::vector<double> detunings_hz;
  double total_time = 0.0;  // simulated window per sequence
};

struct RunConfig {
  GTensor g;
  Eigen::Matrix3d frame_rotation = Eigen::Matrix3d::Identity();  // lab -> g basis
  Eigen::Vector3d field_direction{0, 0, 1};                      // lab frame
  double field_tesla = 0.0;
  std::optional<SweepSpec> sweep;

  EnsembleSpec ensemble;
  double inhomogeneous_fwhm = 0.0;  // [Hz], for flip-flop gating
  std::vector<SequenceConfig> sequences;
  std::optional<FidelityConfig> fidelity;
  std::optional<NoiseConfig> noise;
  std::optional<ClusterConfig> cluster;

  nlohmann::json resolved;  // fully-resolved SI values, embedded in outputs

  // field direction rotated into the g eigenbasis
  Eigen::Vector3d field_in_g_basis(const Eigen::Vector3d& lab_dir) const {
    return (frame_rotation * lab_dir).normalized();
  }
};

RunConfig load_config(const std::string& path);

// great-circle interpolation between the sweep endpoints; returns unit
// vectors plus the angle [rad] from the start direction
std::vector<std::pair<double, Eigen::Vector3d>> sweep_directions(const SweepSpec& s);

}  // namespace spinsim
