#include "spinsim/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "spinsim/constants.hpp"

namespace spinsim {

using constants::pi;
using nlohmann::json;

namespace {

const std::map<std::string, double>& unit_table(UnitKind kind) {
  static const std::map<std::string, double> time{
      {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"µs", 1e-6}, {"ns", 1e-9},
      {"ps", 1e-12}};
  static const std::map<std::string, double> freq{
      {"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
  static const std::map<std::string, double> field{
      {"T", 1.0}, {"mT", 1e-3}, {"uT", 1e-6}};
  static const std::map<std::string, double> length{
      {"m", 1.0},  {"cm", 1e-2}, {"mm", 1e-3},       {"um", 1e-6},
      {"nm", 1e-9}, {"pm", 1e-12}, {"angstrom", 1e-10}, {"A", 1e-10}};
  static const std::map<std::string, double> angle{{"rad", 1.0},
                                                   {"deg", pi / 180.0}};
  static const std::map<std::string, double> fraction{
      {"", 1.0}, {"ppm", 1e-6}, {"ppb", 1e-9}, {"%", 1e-2}};
  static const std::map<std::string, double> density{
      {"m^-3", 1.0}, {"1/m^3", 1.0}, {"cm^-3", 1e6}, {"1/cm^3", 1e6}};
  switch (kind) {
    case UnitKind::Time: return time;
    case UnitKind::Frequency: return freq;
    case UnitKind::Field: return field;
    case UnitKind::Length: return length;
    case UnitKind::Angle: return angle;
    case UnitKind::Fraction: return fraction;
    case UnitKind::Density: return density;
  }
  throw std::logic_error("unknown unit kind");
}

std::string allowed_units(UnitKind kind) {
  std::string s;
  for (const auto& [u, f] : unit_table(kind)) {
    if (!s.empty()) s += ", ";
    s += u.empty() ? "<none>" : u;
  }
  return s;
}

}  // namespace

double parse_quantity(const json& value, UnitKind kind, const std::string& key) {
  if (value.is_number()) return value.get<double>();
  if (!value.is_string()) {
    throw ConfigError(key + ": expected a number or a string with a unit suffix");
  }
  const std::string s = value.get<std::string>();
  std::size_t pos = 0;
  double num = 0.0;
  try {
    num = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": cannot parse number in '" + s + "'");
  }
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  std::string unit = s.substr(pos);
  while (!unit.empty() && std::isspace(static_cast<unsigned char>(unit.back()))) {
    unit.pop_back();
  }
  const auto& table = unit_table(kind);
  const auto it = table.find(unit);
  if (it == table.end()) {
    throw ConfigError(key + ": unknown unit '" + unit + "' in '" + s +
                      "' (allowed: " + allowed_units(kind) + ")");
  }
  return num * it->second;
}

std::vector<std::pair<double, Eigen::Vector3d>> sweep_directions(const SweepSpec& s) {
  const Eigen::Vector3d a = s.from.normalized();
  const Eigen::Vector3d b = s.to.normalized();
  const double omega = std::acos(std::clamp(a.dot(b), -1.0, 1.0));
  if (omega > pi - 1e-9) {
    throw ConfigError("sweep: endpoints are antiparallel, great circle is ambiguous");
  }
  std::vector<std::pair<double, Eigen::Vector3d>> out;
  for (int i = 0; i < s.steps; ++i) {
    const double t = s.steps > 1 ? static_cast<double>(i) / (s.steps - 1) : 0.0;
    Eigen::Vector3d dir;
    if (omega < 1e-12) {
      dir = a;
    } else {
      dir = (std::sin((1 - t) * omega) * a + std::sin(t * omega) * b) /
            std::sin(omega);
    }
    out.emplace_back(t * omega, dir.normalized());
  }
  return out;
}

namespace {

Eigen::Vector3d parse_vec3(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 3) {
    throw ConfigError(key + ": expected an array of three numbers");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

class Parser {
 public:
  Parser(const json& root, std::filesystem::path base_dir)
      : root_(root), base_dir_(std::move(base_dir)) {}

  RunConfig run() {
    RunConfig cfg;
    section("g_tensor", [&] { parse_g(cfg); });
    section("frame_rotation", [&] { parse_rotation(cfg); });
    section("field", [&] { parse_field(cfg); });
    section("sweep", [&] { parse_sweep(cfg); });
    section("ensemble", [&] { parse_ensemble(cfg); });
    section("sequences", [&] { parse_sequences(cfg); });
    section("mc", [&] { parse_mc(cfg); });
    section("fidelity", [&] { parse_fidelity(cfg); });
    section("noise", [&] { parse_noise(cfg); });
    section("cluster", [&] { parse_cluster(cfg); });
    if (!errors_.empty()) {
      std::string all = "configuration errors:";
      for (const auto& e : errors_) all += "\n  - " + e;
      throw ConfigError(all);
    }
    return cfg;
  }

 private:
  template <typename F>
  void section(const char* name, F&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      errors_.push_back(std::string(name) + ": " + e.what());
    }
  }

  void parse_g(RunConfig& cfg) {
    if (!root_.contains("g_tensor")) throw ConfigError("missing (array of three g-values)");
    const Eigen::Vector3d g = parse_vec3(root_["g_tensor"], "g_tensor");
    cfg.g = GTensor(g.x(), g.y(), g.z());
    cfg.resolved["g_tensor"] = {g.x(), g.y(), g.z()};
  }

  void parse_rotation(RunConfig& cfg) {
    if (!root_.contains("frame_rotation")) return;
    const auto& m = root_["frame_rotation"];
    if (!m.is_array() || m.size() != 3) throw ConfigError("expected 3x3 array");
    Eigen::Matrix3d r;
    for (int i = 0; i < 3; ++i) r.row(i) = parse_vec3(m[i], "frame_rotation row");
    if ((r * r.transpose() - Eigen::Matrix3d::Identity()).norm() > 1e-6) {
      throw ConfigError("matrix is not orthonormal");
    }
    cfg.frame_rotation = r;
    cfg.resolved["frame_rotation"] = m;
  }

  void parse_field(RunConfig& cfg) {
    if (!root_.contains("field")) return;
    const auto& f = root_["field"];
    if (f.contains("direction")) {
      cfg.field_direction = parse_vec3(f["direction"], "field.direction").normalized();
    }
    if (f.contains("magnitude")) {
      cfg.field_tesla = parse_quantity(f["magnitude"], UnitKind::Field, "field.magnitude");
    }
    cfg.resolved["field"] = {
        {"direction", {cfg.field_direction.x(), cfg.field_direction.y(),
                       cfg.field_direction.z()}},
        {"magnitude_T", cfg.field_tesla}};
  }

  void parse_sweep(RunConfig& cfg) {
    if (!root_.contains("sweep")) return;
    const auto& s = root_["sweep"];
    SweepSpec sp;
    sp.from = parse_vec3(s.at("from"), "sweep.from").normalized();
    sp.to = parse_vec3(s.at("to"), "sweep.to").normalized();
    sp.steps = s.at("steps").get<int>();
    if (sp.steps < 1) throw ConfigError("steps must be >= 1");
    cfg.sweep = sp;
    cfg.resolved["sweep"] = {{"from", {sp.from.x(), sp.from.y(), sp.from.z()}},
                             {"to", {sp.to.x(), sp.to.y(), sp.to.z()}},
                             {"steps", sp.steps}};
  }

  void parse_ensemble(RunConfig& cfg) {
    if (!root_.contains("ensemble")) return;
    const auto& e = root_["ensemble"];
    auto& spec = cfg.ensemble;
    spec.concentration =
        parse_quantity(e.at("concentration"), UnitKind::Fraction, "concentration");
    if (e.contains("site_density")) {
      spec.site_density =
          parse_quantity(e["site_density"], UnitKind::Density, "site_density");
    } else if (e.contains("lattice")) {
      const auto& l = e["lattice"];
      const double a = parse_quantity(l.at("a"), UnitKind::Length, "lattice.a");
      const double b = parse_quantity(l.at("b"), UnitKind::Length, "lattice.b");
      const double c = parse_quantity(l.at("c"), UnitKind::Length, "lattice.c");
      const double beta =
          l.contains("beta") ? parse_quantity(l["beta"], UnitKind::Angle, "lattice.beta")
                             : pi / 2;
      const int sites = l.at("sites_per_cell").get<int>();
      if (sites < 1) throw ConfigError("lattice.sites_per_cell must be >= 1");
      spec.site_density = sites / (a * b * c * std::sin(beta));
    } else {
      throw ConfigError("need either site_density or lattice constants");
    }
    if (e.contains("eta")) spec.eta = e["eta"].get<double>();
    if (e.contains("lattice_file")) {
      std::filesystem::path path = e["lattice_file"].get<std::string>();
      if (path.is_relative()) path = base_dir_ / path;
      if (!std::ifstream(path)) {
        throw ConfigError("lattice_file not found: " + path.string());
      }
      spec.lattice = load_lattice(path.string());
      cfg.resolved["lattice_file"] = path.string();
    }
    if (e.contains("bath")) {
      for (const auto& b : e["bath"]) {
        BathSpecies sp2;
        sp2.name = b.at("name").get<std::string>();
        sp2.concentration =
            parse_quantity(b.at("concentration"), UnitKind::Fraction,
                           sp2.name + ".concentration");
        if (b.contains("g_tensor")) {
          const Eigen::Vector3d gv = parse_vec3(b["g_tensor"], sp2.name + ".g_tensor");
          sp2.g = GTensor(gv.x(), gv.y(), gv.z());
        } else if (b.contains("moment_mu_N")) {
          sp2.moment = b["moment_mu_N"].get<double>() * constants::mu_N;
        } else {
          throw ConfigError(sp2.name + ": need g_tensor or moment_mu_N");
        }
        const std::string pl = b.value("placement", "continuum");
        if (pl == "lattice") {
          sp2.placement = Placement::Lattice;
        } else if (pl == "continuum") {
          sp2.placement = Placement::Continuum;
        } else {
          throw ConfigError(sp2.name + ": placement must be lattice or continuum");
        }
        spec.bath_species.push_back(sp2);
      }
    }
    if (e.contains("inhomogeneous_linewidth")) {
      cfg.inhomogeneous_fwhm = parse_quantity(
          e["inhomogeneous_linewidth"], UnitKind::Frequency, "inhomogeneous_linewidth");
    }
    cfg.resolved["ensemble"] = {{"concentration", spec.concentration},
                                {"site_density_m3", spec.site_density},
                                {"eta", spec.eta},
                                {"inhomogeneous_fwhm_Hz", cfg.inhomogeneous_fwhm},
                                {"bath_species", spec.bath_species.size()}};
  }

  void parse_sequences(RunConfig& cfg) {
    if (!root_.contains("sequences")) return;
    int idx = 0;
    for (const auto& s : root_["sequences"]) {
      SequenceConfig sc;
      const std::string kind = s.at("kind").get<std::string>();
      sc.kind = sequence_kind_from_name(kind);
      if (s.contains("spacing")) {
        sc.params.spacing = parse_quantity(s["spacing"], UnitKind::Time, "spacing");
      }
      if (s.contains("pulse_duration")) {
        sc.params.pulse_duration =
            parse_quantity(s["pulse_duration"], UnitKind::Time, "pulse_duration");
      }
      if (s.contains("pi2_duration")) {
        sc.params.pi2_duration =
            parse_quantity(s["pi2_duration"], UnitKind::Time, "pi2_duration");
      }
      if (s.contains("c_target")) sc.params.c_target = s["c_target"].get<double>();
      if (s.contains("n_repeats")) sc.params.n_repeats = s["n_repeats"].get<int>();
      sc.label = s.value("label", kind + "_" + std::to_string(idx));
      cfg.sequences.push_back(sc);
      cfg.resolved["sequences"].push_back(
          {{"kind", kind},
           {"label", sc.label},
           {"spacing_s", sc.params.spacing},
           {"pulse_duration_s", sc.params.pulse_duration},
           {"pi2_duration_s", sc.params.pi2_duration},
           {"c_target", sc.params.c_target},
           {"n_repeats", sc.params.n_repeats}});
      ++idx;
    }
  }

  void parse_mc(RunConfig& cfg) {
    if (!root_.contains("mc")) return;
    const auto& m = root_["mc"];
    if (m.contains("seed")) cfg.ensemble.seed = m["seed"].get<std::uint64_t>();
    if (m.contains("realizations")) {
      cfg.ensemble.realizations = m["realizations"].get<int>();
    }
    if (m.contains("bath_spins")) cfg.ensemble.bath_spins = m["bath_spins"].get<int>();
  }

  void parse_fidelity(RunConfig& cfg) {
    if (!root_.contains("fidelity")) return;
    const auto& f = root_["fidelity"];
    FidelityConfig fc;
    fc.omega = 2 * pi * parse_quantity(f.at("rabi"), UnitKind::Frequency, "rabi");
    fc.inhomogeneous_fwhm =
        parse_quantity(f.at("linewidth"), UnitKind::Frequency, "linewidth");
    fc.t_p = parse_quantity(f.at("t_pi"), UnitKind::Time, "t_pi");
    cfg.fidelity = fc;
    cfg.resolved["fidelity"] = {{"rabi_rad_s", fc.omega},
                                {"linewidth_Hz", fc.inhomogeneous_fwhm},
                                {"t_pi_s", fc.t_p}};
  }

  void parse_noise(RunConfig& cfg) {
    if (!root_.contains("noise")) return;
    const auto& n = root_["noise"];
    NoiseConfig nc;
    nc.model.amplitude =
        2 * pi * parse_quantity(n.at("amplitude"), UnitKind::Frequency, "amplitude");
    nc.model.correlation_time =
        parse_quantity(n.at("correlation_time"), UnitKind::Time, "correlation_time");
    if (n.contains("n_pi")) nc.n_pi = n["n_pi"].get<std::vector<int>>();
    if (n.contains("trajectories")) nc.trajectories = n["trajectories"].get<int>();
    cfg.noise = nc;
    cfg.resolved["noise"] = {{"amplitude_rad_s", nc.model.amplitude},
                             {"correlation_time_s", nc.model.correlation_time},
                             {"n_pi", nc.n_pi},
                             {"trajectories", nc.trajectories}};
  }

  void parse_cluster(RunConfig& cfg) {
    if (!root_.contains("cluster")) return;
    const auto& c = root_["cluster"];
    ClusterConfig cc;
    for (const auto& p : c.at("positions")) {
      if (!p.is_array() || p.size() != 3) {
        throw ConfigError("positions entries must be arrays of three lengths");
      }
      cc.positions.emplace_back(
          parse_quantity(p[0], UnitKind::Length, "cluster position"),
          parse_quantity(p[1], UnitKind::Length, "cluster position"),
          parse_quantity(p[2], UnitKind::Length, "cluster position"));
    }
    if (c.contains("detunings")) {
      for (const auto& d : c["detunings"]) {
        cc.detunings_hz.push_back(
            parse_quantity(d, UnitKind::Frequency, "cluster detuning"));
      }
    }
    if (c.contains("total_time")) {
      cc.total_time = parse_quantity(c["total_time"], UnitKind::Time, "total_time");
    }
    cfg.cluster = cc;
    cfg.resolved["cluster"] = {{"spins", cc.positions.size()},
                               {"total_time_s", cc.total_time}};
  }

  const json& root_;
  std::filesystem::path base_dir_;
  std::vector<std::string> errors_;
};

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json root;
  try {
    root = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  RunConfig cfg =
      Parser(root, std::filesystem::path(path).parent_path()).run();
  cfg.resolved["config_path"] = path;
  return cfg;
}

}  // namespace spinsim
