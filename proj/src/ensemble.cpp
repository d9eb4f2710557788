#include "spinsim/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "spinsim/constants.hpp"
#include "spinsim/rng.hpp"
#include "spinsim/sequence.hpp"

namespace spinsim {

using constants::h;
using constants::mu_0;
using constants::mu_B;
using constants::pi;

double Lattice::cell_volume() const { return std::abs(cell.determinant()); }

double Lattice::site_density() const {
  const double v = cell_volume();
  if (!(v > 0)) throw std::invalid_argument("lattice cell is degenerate");
  return static_cast<double>(fractional_sites.size()) / v;
}

Lattice load_lattice(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lattice file: " + path);
  Lattice lat;
  int n_vec = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::string key;
    double x, y, z;
    ss >> key >> x >> y >> z;
    if (!ss) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 'lattice_vector x y z' or 'site fx fy fz'");
    }
    if (key == "lattice_vector") {
      if (n_vec >= 3) throw std::runtime_error(path + ": more than three lattice vectors");
      lat.cell.col(n_vec++) = Eigen::Vector3d(x, y, z);
    } else if (key == "site") {
      lat.fractional_sites.emplace_back(x, y, z);
    } else {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": unknown keyword '" + key + "'");
    }
  }
  if (n_vec != 3 || lat.fractional_sites.empty()) {
    throw std::runtime_error(path + ": need three lattice vectors and at least one site");
  }
  return lat;
}

void EnsembleSpec::validate() const {
  if (!(concentration > 0.0) || concentration > 1.0) {
    throw std::invalid_argument("concentration must be in (0, 1]");
  }
  if (!(site_density > 0.0)) throw std::invalid_argument("site_density must be > 0");
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("eta must be in [0, 1]");
  if (bath_spins < 10) throw std::invalid_argument("bath_spins must be >= 10");
  if (realizations < 1) throw std::invalid_argument("realizations must be >= 1");
}

double dipolar_linewidth(double gamma_eff, double n_eff) {
  if (!(gamma_eff > 0) || !(n_eff > 0)) {
    throw std::invalid_argument("dipolar_linewidth: inputs must be positive");
  }
  return 2.0 * pi / (9.0 * std::sqrt(3.0)) * mu_0 * h * gamma_eff * gamma_eff * n_eff;
}

CoherencePrediction coherence_from_linewidth(double fwhm, double T1_ff) {
  if (!(fwhm > 0)) throw std::invalid_argument("fwhm must be > 0");
  CoherencePrediction p;
  p.fwhm = fwhm;
  p.T1_ff = T1_ff;
  const double t2_dd = 1.0 / (pi * fwhm);
  if (2.0 * T1_ff < t2_dd) {
    p.T2 = 2.0 * T1_ff;
    p.lifetime_cap_applied = true;
  } else {
    p.T2 = t2_dd;
  }
  p.decay_shape = DecayShape::Exponential;
  return p;
}

namespace {

// quantile of a sorted sample with linear interpolation
double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * (static_cast<double>(v.size()) - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double f = pos - static_cast<double>(lo);
  return v[lo] * (1 - f) + v[hi] * f;
}

double iqr(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, 0.75) - quantile_sorted(v, 0.25);
}

Eigen::Vector3d random_direction(Rng& rng) {
  // Marsaglia sphere point picking
  double a, b, s;
  do {
    a = rng.uniform(-1.0, 1.0);
    b = rng.uniform(-1.0, 1.0);
    s = a * a + b * b;
  } while (s >= 1.0);
  const double f = 2.0 * std::sqrt(1.0 - s);
  return {a * f, b * f, 1.0 - 2.0 * s};
}

// One Poisson bath realization; returns the probe frequency shift [Hz] where
// each bath spin contributes 2 * J(r) * s / h with s = +-1 (sigma_z eigenvalue).
template <typename CouplingFn>
double continuum_shift(Rng& rng, double density, int expected_spins,
                       double min_sep, CouplingFn&& coupling_j) {
  const double radius =
      std::cbrt(3.0 * expected_spins / (4.0 * pi * density));
  const int m = rng.poisson(static_cast<double>(expected_spins));
  double shift = 0.0, comp = 0.0;  // Neumaier compensated sum
  for (int j = 0; j < m; ++j) {
    const double r = radius * std::cbrt(rng.uniform());
    const Eigen::Vector3d dir = random_direction(rng);
    const double s = rng.sign();
    if (r < min_sep) continue;
    const double term = 2.0 * coupling_j(r, dir) * s / h;
    const double t = shift + term;
    comp += (std::abs(shift) >= std::abs(term)) ? (shift - t) + term
                                                : (term - t) + shift;
    shift = t;
  }
  return shift + comp;
}

void require_realizations(int got, int needed, const char* what) {
  if (got < needed) {
    throw std::invalid_argument(std::string(what) + ": " + std::to_string(got) +
                                " realizations is below the precision floor; use at least " +
                                std::to_string(needed));
  }
}

}  // namespace

CoherencePrediction decoupled_coherence(const ZeemanFrame& frame, double c,
                                        const EnsembleSpec& spec) {
  spec.validate();
  if (c < 0.0 || c > 1.0) throw std::invalid_argument("c must be in [0, 1]");
  require_realizations(spec.realizations, 400, "decoupled_coherence");
  const double n = spec.n_eff();
  std::vector<double> shifts(spec.realizations);
  for (int k = 0; k < spec.realizations; ++k) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(k)));
    shifts[k] = continuum_shift(
        rng, n, spec.bath_spins, kDefaultMinSeparation,
        [&](double r, const Eigen::Vector3d& dir) {
          const PairGeometry geom(r, dir, frame);
          return redistribute(c, pair_coupling(frame, geom)).Jt_I;
        });
  }
  // the shift distribution is Lorentzian; its interquartile range equals the fwhm
  const double fwhm = iqr(shifts);
  return coherence_from_linewidth(fwhm);
}

double flip_flop_time(const ZeemanFrame& frame, double c, const EnsembleSpec& spec,
                      double inhomogeneous_fwhm) {
  spec.validate();
  if (!(inhomogeneous_fwhm > 0)) {
    throw std::invalid_argument("flip_flop_time: inhomogeneous linewidth must be > 0");
  }
  require_realizations(spec.realizations, 400, "flip_flop_time");
  const double n = spec.n_eff();
  std::vector<double> shifts(spec.realizations);
  for (int k = 0; k < spec.realizations; ++k) {
    Rng rng(derive_seed(spec.seed ^ 0x5a5a5a5a5a5a5a5aULL,
                        static_cast<std::uint64_t>(k)));
    shifts[k] = continuum_shift(
        rng, n, spec.bath_spins, kDefaultMinSeparation,
        [&](double r, const Eigen::Vector3d& dir) {
          const PairGeometry geom(r, dir, frame);
          return redistribute(c, pair_coupling(frame, geom)).Jt_S;
        });
  }
  const double w_s = iqr(shifts);  // [Hz] width of flip-flop coupling spectrum
  if (w_s <= 0) return std::numeric_limits<double>::infinity();
  // approximate model: exchange rate ~ coupling width gated by the fraction of
  // neighbours within the line
  const double rate = 0.5 * pi * w_s * w_s / inhomogeneous_fwhm;
  return 1.0 / rate;
}

std::vector<SpeciesBroadening> offresonant_broadening(const EnsembleSpec& spec,
                                                      const ZeemanFrame& frame,
                                                      int realizations) {
  spec.validate();
  require_realizations(realizations, 100, "offresonant_broadening");
  const Eigen::Vector3d m_probe = 0.5 * mu_B * frame.uz;
  std::vector<SpeciesBroadening> out;
  std::uint64_t species_index = 0;

  for (const auto& sp : spec.bath_species) {
    ++species_index;
    SpeciesBroadening sb;
    sb.name = sp.name;
    if (!(sp.concentration > 0)) {
      out.push_back(sb);
      continue;
    }
    Eigen::Vector3d m_bath;
    if (sp.g) {
      const FieldOrientation b(frame.b_hat);
      m_bath = 0.5 * mu_B * zeeman_frame(*sp.g, b).uz;
    } else {
      m_bath = sp.moment * frame.b_hat;
    }
    const auto coupling_j = [&](double r, const Eigen::Vector3d& dir) {
      return mu_0 / (4.0 * pi * r * r * r) *
             (m_probe.dot(m_bath) - 3.0 * m_probe.dot(dir) * m_bath.dot(dir));
    };

    std::vector<double> shifts(realizations);
    if (sp.placement == Placement::Continuum) {
      const double density = sp.concentration * spec.site_density;
      for (int k = 0; k < realizations; ++k) {
        Rng rng(derive_seed(spec.seed + species_index * 0x9e3779b9ULL,
                            static_cast<std::uint64_t>(k)));
        shifts[k] = continuum_shift(rng, density, spec.bath_spins,
                                    kDefaultMinSeparation, coupling_j);
      }
    } else {
      if (!spec.lattice) {
        throw std::invalid_argument("offresonant_broadening: species '" + sp.name +
                                    "' requires lattice data");
      }
      const Lattice& lat = *spec.lattice;
      const double density = sp.concentration * lat.site_density();
      const double radius = std::cbrt(3.0 * spec.bath_spins / (4.0 * pi * density));
      // enumerate candidate sites once (geometry is fixed, occupation varies)
      std::vector<double> site_j;
      const double volume = lat.cell_volume();
      int range[3];
      for (int i = 0; i < 3; ++i) {
        const Eigen::Vector3d cross =
            lat.cell.col((i + 1) % 3).cross(lat.cell.col((i + 2) % 3));
        const double plane_spacing = volume / cross.norm();
        range[i] = static_cast<int>(std::ceil(radius / plane_spacing)) + 1;
      }
      for (int n1 = -range[0]; n1 <= range[0]; ++n1)
        for (int n2 = -range[1]; n2 <= range[1]; ++n2)
          for (int n3 = -range[2]; n3 <= range[2]; ++n3)
            for (const auto& f : lat.fractional_sites) {
              const Eigen::Vector3d pos =
                  lat.cell * (Eigen::Vector3d(n1, n2, n3) + f);
              const double r = pos.norm();
              if (r < kDefaultMinSeparation || r > radius) continue;
              site_j.push_back(coupling_j(r, pos / r));
            }
      for (int k = 0; k < realizations; ++k) {
        Rng rng(derive_seed(spec.seed + species_index * 0x9e3779b9ULL,
                            static_cast<std::uint64_t>(k)));
        double shift = 0.0;
        for (const double jv : site_j) {
          if (sp.concentration < 1.0 && rng.uniform() >= sp.concentration) continue;
          shift += 2.0 * jv * rng.sign() / h;
        }
        shifts[k] = shift;
      }
    }
    sb.fwhm = iqr(shifts);
    out.push_back(sb);
  }
  return out;
}

double pi_pulse_fidelity(double omega, double inhomogeneous_fwhm, double t_p) {
  if (!(omega > 0) || !(t_p > 0) || inhomogeneous_fwhm < 0) {
    throw std::invalid_argument("pi_pulse_fidelity: invalid inputs");
  }
  const double on_res = std::pow(std::sin(omega * t_p / 2.0), 2);
  if (inhomogeneous_fwhm == 0.0) return on_res;

  const double hw = inhomogeneous_fwhm / 2.0;  // Lorentzian half width [Hz]
  // Detuning-to-nutation conversion calibrated against pulsed-ESR flip
  // probabilities: the generalized Rabi frequency uses pi * detuning.
  const auto integrand = [&](double phi) {
    const double dnu = hw * std::tan(phi);
    const double jac = hw / std::pow(std::cos(phi), 2);
    const double lor = hw / (pi * (dnu * dnu + hw * hw));
    const double w2 = omega * omega + std::pow(pi * dnu, 2);
    return lor * (omega * omega / w2) *
           std::pow(std::sin(std::sqrt(w2) * t_p / 2.0), 2) * jac;
  };
  double error = 0.0;
  const double eta = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, -pi / 2, pi / 2, 12, 1e-10, &error);
  if (!std::isfinite(eta) || error > 1e-4) {
    throw std::runtime_error("pi_pulse_fidelity: quadrature failed to converge");
  }
  return std::clamp(eta, 0.0, 1.0);
}

double effective_concentration(double n, double eta) {
  if (n < 0) throw std::invalid_argument("concentration must be >= 0");
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("eta must be in [0, 1]");
  return eta * n;
}

}  // namespace spinsim
