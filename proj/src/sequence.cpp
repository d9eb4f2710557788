#include "spinsim/sequence.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "spinsim/constants.hpp"

namespace spinsim {

using constants::pi;

const char* to_string(PulseAxis axis) {
  switch (axis) {
    case PulseAxis::PlusX: return "+X";
    case PulseAxis::MinusX: return "-X";
    case PulseAxis::PlusY: return "+Y";
    case PulseAxis::MinusY: return "-Y";
  }
  return "?";
}

Eigen::Vector3d axis_vector(PulseAxis axis) {
  switch (axis) {
    case PulseAxis::PlusX: return {1, 0, 0};
    case PulseAxis::MinusX: return {-1, 0, 0};
    case PulseAxis::PlusY: return {0, 1, 0};
    case PulseAxis::MinusY: return {0, -1, 0};
  }
  return {0, 0, 0};
}

const char* to_string(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::Ramsey: return "ramsey";
    case SequenceKind::HahnEcho: return "hahn_echo";
    case SequenceKind::XY4: return "xy4";
    case SequenceKind::XY8: return "xy8";
    case SequenceKind::Droid60: return "droid60";
    case SequenceKind::DroidAsym: return "droid_asym";
  }
  return "?";
}

SequenceKind sequence_kind_from_name(const std::string& name) {
  if (name == "ramsey") return SequenceKind::Ramsey;
  if (name == "hahn_echo" || name == "spin_echo") return SequenceKind::HahnEcho;
  if (name == "xy4") return SequenceKind::XY4;
  if (name == "xy8") return SequenceKind::XY8;
  if (name == "droid60") return SequenceKind::Droid60;
  if (name == "droid_asym") return SequenceKind::DroidAsym;
  throw std::invalid_argument("unknown sequence kind: " + name);
}

namespace {

bool is_clifford_angle(double angle) {
  return std::abs(angle - pi / 2) < 1e-12 || std::abs(angle - pi) < 1e-12;
}

// Heisenberg map of the sigma vector through a pulse of `angle` about `axis`:
// a <- R_n(-angle) a.
Eigen::Matrix3d frame_rotation(const Pulse& p) {
  return Eigen::AngleAxisd(-p.angle, axis_vector(p.axis)).toRotationMatrix();
}

Eigen::Vector3d snap_axis(const Eigen::Vector3d& a) {
  Eigen::Vector3d snapped;
  for (int i = 0; i < 3; ++i) snapped[i] = std::round(a[i]);
  if ((snapped - a).norm() > 1e-9 || std::abs(snapped.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument(
        "toggling frame left the axis set; sequence contains a non-Clifford rotation");
  }
  return snapped;
}

}  // namespace

void PulseSequence::validate() const {
  double t_prev = -1.0;
  for (const auto& p : pulses) {
    if (!is_clifford_angle(p.angle)) {
      throw std::invalid_argument("pulse angle must be pi/2 or pi");
    }
    if (p.duration < 0 || p.start < t_prev - 1e-15) {
      throw std::invalid_argument("pulses overlap or are out of order");
    }
    t_prev = p.start + p.duration;
  }
  if (total_time() < t_prev - 1e-15) {
    throw std::invalid_argument("cycle_time shorter than the last pulse");
  }
}

namespace {

struct CycleBuilder {
  std::vector<Pulse> pulses;
  double t = 0.0;
  Eigen::Matrix3d net = Eigen::Matrix3d::Identity();

  void dwell(double d, int segment_index, const char* label) {
    if (d < -1e-18) {
      throw std::invalid_argument(std::string("infeasible timing: segment ") +
                                  std::to_string(segment_index) + " (" + label +
                                  ") has negative delay after rescaling");
    }
    t += std::max(d, 0.0);
  }

  void pulse(PulseAxis axis, double angle, double duration) {
    pulses.push_back({axis, angle, t, duration});
    net = frame_rotation(pulses.back()) * net;
    t += duration;
  }
};

PulseSequence replicate(CycleBuilder&& cycle, int n_repeats, std::string name) {
  if (n_repeats < 1) throw std::invalid_argument("n_repeats must be >= 1");
  PulseSequence seq;
  seq.name = std::move(name);
  seq.cycle_time = cycle.t;
  seq.n_cycles = n_repeats;
  seq.net_cycle_rotation = cycle.net;
  for (int rep = 0; rep < n_repeats; ++rep) {
    for (const auto& p : cycle.pulses) {
      Pulse q = p;
      q.start += rep * cycle.t;
      seq.pulses.push_back(q);
    }
  }
  seq.validate();
  return seq;
}

PulseSequence build_xy(const SequenceParams& prm, const std::vector<PulseAxis>& axes,
                       std::string name) {
  const double tau = prm.spacing;
  const double d = prm.pulse_duration;
  if (d > 0 && tau <= d) {
    throw std::invalid_argument("spacing must exceed pulse duration");
  }
  CycleBuilder cb;
  const int n = static_cast<int>(axes.size());
  for (int k = 0; k < n; ++k) {
    const double center = (k + 0.5) * tau;
    cb.dwell(center - d / 2 - cb.t, k, "inter-pulse delay");
    cb.pulse(axes[k], pi, d);
  }
  cb.dwell(n * tau - cb.t, n, "trailing delay");
  return replicate(std::move(cb), prm.n_repeats, std::move(name));
}

// Interaction-decoupling cycle with balanced signed dwell on all six axes.
// Ideal-pulse frame path (z visits marked *):
//   +z* +x -x -z* +y -y +z* -x +x -z* -y +y -> +z
// The z-visit delays are scaled to hit c_target; at c_target = 0 they
// collapse to zero and the bracketing pi/2 pulses become back-to-back.
PulseSequence build_droid(const SequenceParams& prm, std::string name) {
  const double tau = prm.spacing;
  const double d_pi = prm.pulse_duration;
  const double d_h = prm.pi2_duration >= 0 ? prm.pi2_duration : d_pi / 2;
  const double c = prm.c_target;
  if (c < 0.0 || c > 1.0) throw std::invalid_argument("c_target must be in [0, 1]");
  if (d_pi > 0 && tau <= d_pi) {
    throw std::invalid_argument("spacing must exceed pulse duration");
  }

  struct Step {
    bool z_visit;
    PulseAxis axis;
    double angle;
  };
  const double H = pi / 2, P = pi;
  const Step steps[12] = {
      {true, PulseAxis::MinusY, H},  {false, PulseAxis::PlusY, P},
      {false, PulseAxis::PlusY, H},  {true, PulseAxis::MinusX, H},
      {false, PulseAxis::PlusX, P},  {false, PulseAxis::PlusX, H},
      {true, PulseAxis::PlusY, H},   {false, PulseAxis::MinusY, P},
      {false, PulseAxis::MinusY, H}, {true, PulseAxis::PlusX, H},
      {false, PulseAxis::MinusX, P}, {false, PulseAxis::MinusX, H},
  };

  // xy delays: slot minus the preceding pulse's width
  double free_xy = 0.0;
  double prev_dur = d_h;  // pulse before the first xy dwell is a pi/2
  std::vector<double> delays(12, 0.0);
  for (int k = 0; k < 12; ++k) {
    const double dur = std::abs(steps[k].angle - pi) < 1e-12 ? d_pi : d_h;
    if (!steps[k].z_visit) {
      delays[k] = tau - prev_dur;
      if (delays[k] < 0) {
        throw std::invalid_argument("infeasible timing: segment " + std::to_string(k) +
                                    " (xy dwell) has negative delay after rescaling");
      }
      free_xy += delays[k];
    }
    prev_dur = dur;
  }
  double tau_z;
  if (c >= 1.0) {
    if (d_pi > 0 || d_h > 0) {
      throw std::invalid_argument(
          "infeasible timing: c_target = 1 requires ideal pulses (xy dwell would be negative)");
    }
    for (auto& d : delays) d = 0.0;
    tau_z = tau;
  } else {
    tau_z = c * free_xy / (4.0 * (1.0 - c));
  }

  CycleBuilder cb;
  for (int k = 0; k < 12; ++k) {
    cb.dwell(steps[k].z_visit ? tau_z : delays[k], k,
             steps[k].z_visit ? "z dwell" : "xy dwell");
    const double dur = std::abs(steps[k].angle - pi) < 1e-12 ? d_pi : d_h;
    cb.pulse(steps[k].axis, steps[k].angle, dur);
  }
  return replicate(std::move(cb), prm.n_repeats, std::move(name));
}

}  // namespace

PulseSequence standard_sequence(SequenceKind kind, const SequenceParams& prm) {
  if (!(prm.spacing > 0)) throw std::invalid_argument("spacing must be > 0");
  switch (kind) {
    case SequenceKind::Ramsey: {
      CycleBuilder cb;
      cb.dwell(prm.spacing, 0, "free evolution");
      return replicate(std::move(cb), prm.n_repeats, "ramsey");
    }
    case SequenceKind::HahnEcho: {
      const double d = prm.pulse_duration;
      if (d > 0 && prm.spacing <= d) {
        throw std::invalid_argument("spacing must exceed pulse duration");
      }
      CycleBuilder cb;
      cb.dwell(prm.spacing, 0, "pre-pulse delay");
      cb.pulse(PulseAxis::PlusX, pi, d);
      cb.dwell(prm.spacing, 1, "post-pulse delay");
      return replicate(std::move(cb), prm.n_repeats, "hahn_echo");
    }
    case SequenceKind::XY4:
      return build_xy(prm,
                      {PulseAxis::PlusX, PulseAxis::PlusY, PulseAxis::PlusX,
                       PulseAxis::PlusY},
                      "xy4");
    case SequenceKind::XY8:
      return build_xy(prm,
                      {PulseAxis::PlusX, PulseAxis::PlusY, PulseAxis::PlusX,
                       PulseAxis::PlusY, PulseAxis::PlusY, PulseAxis::PlusX,
                       PulseAxis::PlusY, PulseAxis::PlusX},
                      "xy8");
    case SequenceKind::Droid60: {
      SequenceParams p = prm;
      p.c_target = 1.0 / 3.0;
      return build_droid(p, "droid60");
    }
    case SequenceKind::DroidAsym:
      return build_droid(prm, "droid_asym");
  }
  throw std::invalid_argument("unknown sequence kind");
}

double TogglingFrame::total_dwell() const {
  double t = 0;
  for (const auto& s : segments) t += s.dwell;
  return t;
}

Eigen::Vector3d TogglingFrame::unsigned_dwell() const {
  Eigen::Vector3d d = Eigen::Vector3d::Zero();
  for (const auto& s : segments) d += s.dwell * s.axis.cwiseAbs();
  return d;
}

Eigen::Vector3d TogglingFrame::signed_dwell() const {
  Eigen::Vector3d d = Eigen::Vector3d::Zero();
  for (const auto& s : segments) d += s.dwell * s.axis;
  return d;
}

double TogglingFrame::z_fraction() const {
  const double total = total_dwell();
  if (total <= 0) throw std::invalid_argument("toggling frame has zero dwell");
  return unsigned_dwell().z() / total;
}

bool TogglingFrame::disorder_balanced(double tol_fraction) const {
  const double total = total_dwell();
  if (total <= 0) return true;
  return signed_dwell().cwiseAbs().maxCoeff() <= tol_fraction * total;
}

namespace {

// Mean of (e . a(theta))^2 over the rotation arc theta in [0, angle], where
// a(theta) = R_n(-theta) a0, plus the value at mid-arc for the sign.
struct ArcWeight {
  double mean_sq;
  double mid_value;
};

ArcWeight arc_weight(const Eigen::Vector3d& a0, const Eigen::Vector3d& n,
                     double angle, const Eigen::Vector3d& e) {
  const double C = n.dot(a0) * n.dot(e);
  const double A = a0.dot(e) - C;
  const double B = -(n.cross(a0)).dot(e);
  const double F = angle;
  const double s2 = std::sin(2 * F), sF = std::sin(F), cF = std::cos(F);
  const double integral = A * A * (F / 2 + s2 / 4) + B * B * (F / 2 - s2 / 4) +
                          C * C * F + A * B * sF * sF + 2 * A * C * sF +
                          2 * B * C * (1 - cF);
  const double mid = A * std::cos(F / 2) + B * std::sin(F / 2) + C;
  return {integral / F, mid};
}

}  // namespace

TogglingFrame toggling_frames(const PulseSequence& seq, bool ideal) {
  seq.validate();
  TogglingFrame frame;
  Eigen::Vector3d a(0, 0, 1);
  double t_cur = 0.0;
  const Eigen::Vector3d lab_axes[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  for (const auto& p : seq.pulses) {
    const double gap = p.start - t_cur;
    if (gap > 1e-18) frame.segments.push_back({a, gap});
    if (!ideal && p.duration > 0) {
      // rotation by -theta about the pulse axis; distribute the arc's
      // squared projections as fractional dwell on the lab axes
      const Eigen::Vector3d n = axis_vector(p.axis);
      for (const auto& e : lab_axes) {
        const auto w = arc_weight(a, -n, p.angle, e);
        if (w.mean_sq > 1e-12) {
          const double sign = w.mid_value >= 0 ? 1.0 : -1.0;
          frame.segments.push_back({sign * e, w.mean_sq * p.duration});
        }
      }
    }
    a = snap_axis(frame_rotation(p) * a);
    t_cur = p.start + p.duration;
  }
  const double tail = seq.total_time() - t_cur;
  if (tail > 1e-18) frame.segments.push_back({a, tail});
  if (frame.segments.empty()) frame.segments.push_back({a, 0.0});
  return frame;
}

AverageHamiltonian redistribute(double c, const DipolarCoupling& j) {
  AverageHamiltonian h;
  h.c = c;
  h.Jt_S = 0.5 * (1 + c) * j.J_S + 0.5 * (1 - c) * j.J_I;
  h.Jt_I = (1 - c) * j.J_S + c * j.J_I;
  return h;
}

AverageHamiltonian average_hamiltonian(const TogglingFrame& frame,
                                       const DipolarCoupling& j) {
  if (frame.segments.empty() || frame.total_dwell() <= 0) {
    throw std::invalid_argument("average_hamiltonian: empty toggling frame");
  }
  return redistribute(frame.z_fraction(), j);
}

double effective_asymmetry(const PulseSequence& seq, double rabi_rad_per_s) {
  if (!(rabi_rad_per_s > 0)) throw std::invalid_argument("rabi must be > 0");
  for (const auto& p : seq.pulses) {
    const double expected = p.angle / rabi_rad_per_s;
    if (std::abs(p.duration - expected) > 0.05 * expected) {
      throw std::invalid_argument(
          "pulse duration inconsistent with Rabi frequency (beyond 5%)");
    }
  }
  return toggling_frames(seq, /*ideal=*/false).z_fraction();
}

void export_timetable_csv(const PulseSequence& seq, std::ostream& os) {
  os << "# pulse timetable for sequence '" << seq.name << "'\n";
  os << "# cycle_time_s=" << seq.cycle_time << " n_cycles=" << seq.n_cycles << "\n";
  os << "start_s,axis,angle_rad,duration_s\n";
  os.precision(9);
  for (const auto& p : seq.pulses) {
    os << p.start << ',' << to_string(p.axis) << ',' << p.angle << ','
       << p.duration << '\n';
  }
}

}  // namespace spinsim
