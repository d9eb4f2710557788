#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "spinsim/dipolar.hpp"

namespace spinsim {

enum class PulseAxis { PlusX, MinusX, PlusY, MinusY };

const char* to_string(PulseAxis axis);
Eigen::Vector3d axis_vector(PulseAxis axis);

// One rotating-frame control pulse. angle is positive (pi/2 or pi); the sign
// of the rotation is carried by the axis.
struct Pulse {
  PulseAxis axis;
  double angle;     // [rad], pi/2 or pi
  double start;     // [s]
  double duration;  // [s], 0 = ideal
};

struct PulseSequence {
  std::vector<Pulse> pulses;  // time-ordered, non-overlapping, all repeats
  double cycle_time = 0.0;    // duration of one cycle [s]
  int n_cycles = 1;
  std::string name;
  Eigen::Matrix3d net_cycle_rotation = Eigen::Matrix3d::Identity();

  double total_time() const { return cycle_time * n_cycles; }
  void validate() const;  // ordering, overlap, angle restrictions
};

enum class SequenceKind { Ramsey, HahnEcho, XY4, XY8, Droid60, DroidAsym };

SequenceKind sequence_kind_from_name(const std::string& name);
const char* to_string(SequenceKind kind);

struct SequenceParams {
  int n_repeats = 1;
  double spacing = 1e-7;        // base inter-pulse slot [s]
  double pulse_duration = 0.0;  // pi-pulse duration [s], 0 = ideal
  double pi2_duration = -1.0;   // pi/2 duration; < 0 means pulse_duration / 2
  double c_target = 1.0 / 3.0;  // droid_asym only
};

PulseSequence standard_sequence(SequenceKind kind, const SequenceParams& params);

// Piecewise-constant trajectory of the axis that sigma_z is mapped onto in
// the interaction picture of the control pulses.
struct FrameSegment {
  Eigen::Vector3d axis;  // signed unit vector (exact +-x/+-y/+-z for ideal frames)
  double dwell;          // [s]
};

struct TogglingFrame {
  std::vector<FrameSegment> segments;

  double total_dwell() const;
  // fraction of dwell with the frame axis on +-z
  double z_fraction() const;
  // per-axis unsigned dwell (x, y, z)
  Eigen::Vector3d unsigned_dwell() const;
  // sum of dwell-weighted signed axes; zero when first-order disorder cancels
  Eigen::Vector3d signed_dwell() const;
  bool disorder_balanced(double tol_fraction = 1e-9) const;
};

// Propagate the frame through the sequence. With ideal = true pulse durations
// are treated as zero; otherwise each pulse contributes fractional dwell on
// the lab axes, weighted by the time average of the squared axis projection
// over the rotation arc.
TogglingFrame toggling_frames(const PulseSequence& seq, bool ideal = true);

struct AverageHamiltonian {
  double Jt_S = 0.0;  // [J]
  double Jt_I = 0.0;  // [J]
  double c = 0.0;     // fraction of dwell spent on +-z
};

// Redistribution identities for a Clifford frame:
//   Jt_S = (1+c)/2 J_S + (1-c)/2 J_I,  Jt_I = (1-c) J_S + c J_I
AverageHamiltonian redistribute(double c, const DipolarCoupling& j);
AverageHamiltonian average_hamiltonian(const TogglingFrame& frame,
                                       const DipolarCoupling& j);

// Asymmetry parameter including finite pulse widths. Requires pulse durations
// consistent with the given Rabi frequency (within 5%).
double effective_asymmetry(const PulseSequence& seq, double rabi_rad_per_s);

// CSV timetable (start, axis, angle, duration) for external use.
void export_timetable_csv(const PulseSequence& seq, std::ostream& os);

}  // namespace spinsim
