#include "spinsim/exactsim.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>

#include "spinsim/constants.hpp"
#include "spinsim/dipolar.hpp"
#include "spinsim/rng.hpp"

namespace spinsim {

using constants::h;
using constants::hbar;
using constants::pi;
using cd = std::complex<double>;

void ClusterSpec::validate() const {
  const int n = size();
  if (n < 2 || n > 12) throw std::invalid_argument("cluster size must be 2..12");
  if ((1 << n) > 4096) throw std::invalid_argument("state dimension exceeds 4096");
  if (probe < 0 || probe >= n) throw std::invalid_argument("probe index out of range");
  if (!detuning_hz.empty() && static_cast<int>(detuning_hz.size()) != n) {
    throw std::invalid_argument("detuning list must match spin count");
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if ((positions[i] - positions[j]).norm() < min_separation) {
        throw std::invalid_argument("cluster spins closer than minimum separation");
      }
}

namespace {

// z eigenvalue of spin `s` in basis state `k`; bit 0 = up
inline double zval(int k, int s) { return (k >> s) & 1 ? -1.0 : 1.0; }

Eigen::MatrixXcd build_coupled(const ClusterSpec& spec,
                               const std::vector<std::array<double, 2>>& pair_js,
                               double disorder_scale) {
  const int n = spec.size();
  const int dim = 1 << n;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
  int idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++idx) {
      const double js = pair_js[idx][0], ji = pair_js[idx][1];
      for (int k = 0; k < dim; ++k) {
        H(k, k) += ji * zval(k, i) * zval(k, j);
        if (((k >> i) & 1) != ((k >> j) & 1)) {
          H(k ^ (1 << i) ^ (1 << j), k) += 2.0 * js;
        }
      }
    }
  if (!spec.detuning_hz.empty() && disorder_scale != 0.0) {
    for (int i = 0; i < n; ++i) {
      const double e = disorder_scale * h * spec.detuning_hz[i] / 2.0;
      for (int k = 0; k < dim; ++k) H(k, k) += e * zval(k, i);
    }
  }
  return H;
}

std::vector<std::array<double, 2>> pair_couplings(const ClusterSpec& spec) {
  const int n = spec.size();
  std::vector<std::array<double, 2>> js;
  js.reserve(n * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Eigen::Vector3d d = spec.positions[j] - spec.positions[i];
      const PairGeometry geom(d.norm(), d.normalized(), spec.frame);
      const DipolarCoupling c = pair_coupling(spec.frame, geom, spec.min_separation);
      js.push_back({c.J_S, c.J_I});
    }
  return js;
}

struct Propagator {
  Eigen::MatrixXcd vecs;
  Eigen::VectorXd vals;  // [J]

  explicit Propagator(const Eigen::MatrixXcd& H) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("Hamiltonian diagonalization failed");
    }
    vecs = es.eigenvectors();
    vals = es.eigenvalues();
  }

  void evolve(Eigen::VectorXcd& psi, double dt) const {
    if (dt <= 0) return;
    Eigen::VectorXcd c = vecs.adjoint() * psi;
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      c[k] *= std::exp(cd(0, -vals[k] * dt / hbar));
    }
    psi = vecs * c;
  }
};

// apply the single-spin 2x2 operator u to spin s of psi
void apply_single(Eigen::VectorXcd& psi, int s, const Eigen::Matrix2cd& u) {
  const int m = 1 << s;
  for (int k = 0; k < psi.size(); ++k) {
    if (k & m) continue;
    const cd a = psi[k], b = psi[k | m];
    psi[k] = u(0, 0) * a + u(0, 1) * b;
    psi[k | m] = u(1, 0) * a + u(1, 1) * b;
  }
}

Eigen::Matrix2cd pulse_matrix(const Pulse& p) {
  const Eigen::Vector3d n = axis_vector(p.axis);
  const double c = std::cos(p.angle / 2), s = std::sin(p.angle / 2);
  Eigen::Matrix2cd sx, sy;
  sx << 0, 1, 1, 0;
  sy << 0, cd(0, -1), cd(0, 1), 0;
  return c * Eigen::Matrix2cd::Identity() - cd(0, s) * (n.x() * sx + n.y() * sy);
}

double pauli_expectation(const Eigen::VectorXcd& psi, int s,
                         const Eigen::Vector3d& e) {
  const int m = 1 << s;
  cd cross = 0.0;
  double zsum = 0.0;
  for (int k = 0; k < psi.size(); ++k) {
    zsum += std::norm(psi[k]) * zval(k, s);
    if (!(k & m)) cross += std::conj(psi[k]) * psi[k | m];
  }
  return e.x() * 2.0 * cross.real() + e.y() * 2.0 * cross.imag() + e.z() * zsum;
}

}  // namespace

Eigen::MatrixXcd build_cluster_hamiltonian(const ClusterSpec& spec) {
  spec.validate();
  return build_coupled(spec, pair_couplings(spec), 1.0);
}

namespace {

SimResult run_sampled(const ClusterSpec& spec, const PulseSequence& seq,
                      InitialState initial, bool ideal_pulses,
                      const Eigen::MatrixXcd& H) {
  const int n = spec.size();
  const int dim = 1 << n;
  const Propagator free_prop(H);

  // finite pulses: diagonalize H plus the drive once per distinct pulse shape
  std::map<std::tuple<int, long long, long long>, Propagator> driven;
  const auto driven_prop = [&](const Pulse& p) -> const Propagator& {
    const auto key = std::make_tuple(static_cast<int>(p.axis),
                                     std::llround(p.angle * 1e12),
                                     std::llround(p.duration * 1e15));
    auto it = driven.find(key);
    if (it == driven.end()) {
      const double omega = p.angle / p.duration;
      const Eigen::Vector3d nv = axis_vector(p.axis);
      Eigen::MatrixXcd Hd = H;
      Eigen::Matrix2cd sx, sy;
      sx << 0, 1, 1, 0;
      sy << 0, cd(0, -1), cd(0, 1), 0;
      const Eigen::Matrix2cd drive =
          hbar * omega / 2.0 * (nv.x() * sx + nv.y() * sy);
      for (int s = 0; s < n; ++s) {
        const int m = 1 << s;
        for (int k = 0; k < dim; ++k) {
          const int bit = (k >> s) & 1;
          Hd(k, k) += drive(bit, bit);
          Hd(k ^ m, k) += drive(1 - bit, bit);
        }
      }
      it = driven.emplace(key, Propagator(Hd)).first;
    }
    return it->second;
  };

  std::vector<int> bath;
  for (int s = 0; s < n; ++s)
    if (s != spec.probe) bath.push_back(s);
  const int n_configs =
      initial == InitialState::ProbeXBathThermal ? (1 << bath.size()) : 1;

  const std::size_t ppc = seq.pulses.size() / std::max(seq.n_cycles, 1);
  SimResult out;
  out.time.assign(seq.n_cycles + 1, 0.0);
  out.coherence.assign(seq.n_cycles + 1, 0.0);
  for (int r = 0; r <= seq.n_cycles; ++r) out.time[r] = r * seq.cycle_time;

  for (int cfg = 0; cfg < n_configs; ++cfg) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    if (initial == InitialState::ProbeXBathThermal) {
      int base = 0;
      for (std::size_t bi = 0; bi < bath.size(); ++bi) {
        if ((cfg >> bi) & 1) base |= 1 << bath[bi];
      }
      psi[base] = 1.0 / std::sqrt(2.0);
      psi[base | (1 << spec.probe)] = 1.0 / std::sqrt(2.0);
    } else {
      const double a = std::pow(2.0, -0.5 * n);
      for (int k = 0; k < dim; ++k) psi[k] = a;
    }

    double t_cur = 0.0;
    std::size_t pulse_idx = 0;
    Eigen::Vector3d readout(1, 0, 0);
    out.coherence[0] += pauli_expectation(psi, spec.probe, readout) / n_configs;
    for (int r = 0; r < seq.n_cycles; ++r) {
      const std::size_t end = std::min(pulse_idx + ppc, seq.pulses.size());
      for (; pulse_idx < end; ++pulse_idx) {
        const Pulse& p = seq.pulses[pulse_idx];
        free_prop.evolve(psi, p.start - t_cur);
        if (ideal_pulses || p.duration <= 0) {
          const Eigen::Matrix2cd u = pulse_matrix(p);
          for (int s = 0; s < n; ++s) apply_single(psi, s, u);
          free_prop.evolve(psi, p.duration);
        } else {
          driven_prop(p).evolve(psi, p.duration);
        }
        t_cur = p.start + p.duration;
      }
      const double boundary = (r + 1) * seq.cycle_time;
      free_prop.evolve(psi, boundary - t_cur);
      t_cur = boundary;
      readout = seq.net_cycle_rotation * readout;
      out.coherence[r + 1] += pauli_expectation(psi, spec.probe, readout) / n_configs;
    }
  }
  return out;
}

}  // namespace

SimResult simulate_sequence(const ClusterSpec& spec, const PulseSequence& seq,
                            InitialState initial, bool ideal_pulses) {
  spec.validate();
  seq.validate();
  return run_sampled(spec, seq, initial, ideal_pulses,
                     build_coupled(spec, pair_couplings(spec), 1.0));
}

SimResult simulate_average_hamiltonian(const ClusterSpec& spec,
                                       const PulseSequence& seq) {
  spec.validate();
  const TogglingFrame frame = toggling_frames(seq, true);
  const double c = frame.z_fraction();
  const double sz_residual = frame.signed_dwell().z() / frame.total_dwell();
  auto js = pair_couplings(spec);
  for (auto& p : js) {
    const AverageHamiltonian ah = redistribute(c, DipolarCoupling{p[0], p[1], 0.0});
    p = {ah.Jt_S, ah.Jt_I};
  }
  PulseSequence empty;
  empty.cycle_time = seq.cycle_time;
  empty.n_cycles = seq.n_cycles;
  empty.name = seq.name + "_aht";
  return run_sampled(spec, empty, InitialState::ProbeXBathThermal, true,
                     build_coupled(spec, js, sz_residual));
}

namespace {

// least-squares coefficient of (1 - s) = C t^2 over the initial decay; stops
// at the first point past 25% loss so coherence revivals cannot leak in
std::pair<double, bool> quadratic_decay(const SimResult& r) {
  double num = 0, den = 0, peak = 0;
  int used = 0;
  for (std::size_t i = 1; i < r.time.size(); ++i) {
    const double d = 1.0 - r.coherence[i];
    if (d > 0.25) break;
    if (peak > 1e-6 && d < 0.8 * peak) break;  // signal turned back up
    if (d < 1e-9) continue;
    peak = std::max(peak, d);
    const double t2 = r.time[i] * r.time[i];
    num += t2 * d;
    den += t2 * t2;
    ++used;
  }
  if (used < 2 || den <= 0) return {0.0, false};
  return {num / den, true};
}

}  // namespace

std::vector<AhtComparison> compare_aht_vs_exact(
    const ClusterSpec& spec, const std::vector<PulseSequence>& seqs) {
  if (seqs.empty()) throw std::invalid_argument("no sequences to compare");
  spec.validate();
  std::vector<AhtComparison> out;
  for (const auto& seq : seqs) {
    AhtComparison cmp;
    cmp.sequence = seq.name;
    const auto exact = simulate_sequence(spec, seq, InitialState::ProbeXBathThermal);
    const auto aht = simulate_average_hamiltonian(spec, seq);
    const auto [ce, oke] = quadratic_decay(exact);
    const auto [ca, oka] = quadratic_decay(aht);
    cmp.exact_curvature = ce;
    cmp.aht_curvature = ca;
    cmp.fit_ok = oke && oka && ca > 0;
    if (cmp.fit_ok) {
      cmp.ratio = ce / ca;
      cmp.higher_order_flagged = std::abs(cmp.ratio - 1.0) > 0.2;
    }
    out.push_back(cmp);
  }
  return out;
}

void NoiseModel::validate() const {
  if (!(amplitude > 0) || !(correlation_time > 0)) {
    throw std::invalid_argument("noise amplitude and correlation time must be > 0");
  }
}

const char* to_string(ShapeClass s) {
  switch (s) {
    case ShapeClass::Exponential: return "exponential";
    case ShapeClass::Gaussian: return "gaussian";
    case ShapeClass::Ambiguous: return "ambiguous";
  }
  return "?";
}

namespace {

struct SignProfile {
  std::vector<double> fraction;  // of total time
  std::vector<double> weight;    // frame z component in [-1, 1]
  double min_fraction = 1.0;
};

SignProfile sign_profile(const PulseSequence& proto) {
  const TogglingFrame frame = toggling_frames(proto, true);
  const double total = frame.total_dwell();
  if (!(total > 0)) throw std::invalid_argument("sequence has no free evolution");
  SignProfile sp;
  for (const auto& seg : frame.segments) {
    if (seg.dwell <= 0) continue;
    sp.fraction.push_back(seg.dwell / total);
    sp.weight.push_back(seg.axis.z());
    sp.min_fraction = std::min(sp.min_fraction, seg.dwell / total);
  }
  return sp;
}

ShapeClass classify_shape(const std::vector<double>& t,
                          const std::vector<double>& y) {
  double resid[2];
  for (int p = 1; p <= 2; ++p) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double x = std::pow(t[i], p);
      num += x * y[i];
      den += x * x;
    }
    const double a = num / den;
    double r = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      r += std::pow(y[i] - a * std::pow(t[i], p), 2);
    }
    resid[p - 1] = r;
  }
  if (resid[0] > 1.5 * resid[1]) return ShapeClass::Gaussian;
  if (resid[1] > 1.5 * resid[0]) return ShapeClass::Exponential;
  return ShapeClass::Ambiguous;
}

}  // namespace

NoiseDecayCurve ou_noise_dephasing(const NoiseModel& noise,
                                   const PulseSequence& proto, int trajectories,
                                   std::uint64_t seed) {
  noise.validate();
  if (trajectories < 100) {
    throw std::invalid_argument("ou_noise_dephasing: need at least 100 trajectories");
  }
  const SignProfile sp = sign_profile(proto);
  const double sigma = noise.amplitude;
  const double tau_c = noise.correlation_time;

  int n_pi = 0;
  for (const auto& p : proto.pulses) {
    if (std::abs(p.angle - pi) < 1e-9) ++n_pi;
  }
  const double t2_guess =
      n_pi > 0 ? std::cbrt(12.0 * n_pi * n_pi * tau_c / (sigma * sigma))
               : std::max(std::sqrt(2.0) / sigma, 2.0 / (sigma * sigma * tau_c));

  NoiseDecayCurve curve;
  const int n_grid = 13;
  for (int gi = 0; gi < n_grid; ++gi) {
    const double total = (0.4 + 1.2 * gi / (n_grid - 1)) * t2_guess;
    const double step = std::min(sp.min_fraction * total, tau_c) / 10.0;
    double sum = 0, sum2 = 0;
    for (int k = 0; k < trajectories; ++k) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(gi) * 0x100000ULL + k));
      double d = sigma * rng.normal();
      double phase = 0;
      for (std::size_t s = 0; s < sp.fraction.size(); ++s) {
        const double len = sp.fraction[s] * total;
        const int m = std::max(1, static_cast<int>(std::ceil(len / step)));
        const double dt = len / m;
        const double decay = std::exp(-dt / tau_c);
        const double kick = sigma * std::sqrt(1.0 - decay * decay);
        for (int u = 0; u < m; ++u) {
          phase += sp.weight[s] * d * dt;
          d = d * decay + kick * rng.normal();
        }
      }
      const double w = std::cos(phase);
      sum += w;
      sum2 += w * w;
    }
    const double mean = sum / trajectories;
    const double var = std::max(0.0, sum2 / trajectories - mean * mean);
    curve.time.push_back(total);
    curve.coherence.push_back(mean);
    curve.stderr_mean.push_back(std::sqrt(var / trajectories));
  }

  // stretched-exponential fit: ln(-ln W) linear in ln t
  std::vector<double> ts, lnl, negl;
  for (int gi = 0; gi < n_grid; ++gi) {
    const double w = curve.coherence[gi];
    if (w <= 0.03 || w >= 0.97) continue;
    ts.push_back(curve.time[gi]);
    negl.push_back(-std::log(w));
    lnl.push_back(std::log(-std::log(w)));
  }
  if (ts.size() < 3) {
    throw std::runtime_error(
        "ou_noise_dephasing: too few usable grid points for the decay fit");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double x = std::log(ts[i]);
    sx += x;
    sy += lnl[i];
    sxx += x * x;
    sxy += x * lnl[i];
  }
  const double m = static_cast<double>(ts.size());
  const double beta = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double b0 = (sy - beta * sx) / m;
  curve.stretch = beta;
  curve.T2 = std::exp(-b0 / beta);
  curve.shape = classify_shape(ts, negl);
  return curve;
}

NoiseScalingResult ou_noise_scaling(const NoiseModel& noise,
                                    const std::vector<int>& n_pi_values,
                                    int trajectories, std::uint64_t seed) {
  noise.validate();
  if (trajectories < 1000) {
    throw std::invalid_argument("ou_noise_scaling: need at least 1000 trajectories");
  }
  if (n_pi_values.size() < 2) {
    throw std::invalid_argument("need at least two pulse numbers");
  }
  NoiseScalingResult res;
  for (std::size_t i = 0; i < n_pi_values.size(); ++i) {
    const int n = n_pi_values[i];
    if (n < 4 || n % 4 != 0) {
      throw std::invalid_argument("pulse numbers must be positive multiples of 4");
    }
    SequenceParams prm;
    prm.n_repeats = n / 4;
    prm.spacing = 1e-6;  // template timing only; rescaled by the noise sweep
    const PulseSequence proto = standard_sequence(SequenceKind::XY4, prm);
    const auto curve =
        ou_noise_dephasing(noise, proto, trajectories, derive_seed(seed, i));
    res.n_pi.push_back(n);
    res.T2.push_back(curve.T2);
    if (i + 1 == n_pi_values.size()) res.shape = curve.shape;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < res.n_pi.size(); ++i) {
    const double x = std::log(static_cast<double>(res.n_pi[i]));
    const double y = std::log(res.T2[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(res.n_pi.size());
  res.exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return res;
}

}  // namespace spinsim
