#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "spinsim/config.hpp"
#include "spinsim/constants.hpp"

using namespace spinsim;
using nlohmann::json;

namespace {
std::string write_temp(const std::string& text) {
  static int counter = 0;
  std::string path = "cfg_test_" + std::to_string(counter++) + ".json";
  std::ofstream(path) << text;
  return path;
}
}  // namespace

TEST_CASE("quantity parsing") {
  CHECK(parse_quantity(json("33 ns"), UnitKind::Time, "t") == doctest::Approx(33e-9));
  CHECK(parse_quantity(json("1.5 us"), UnitKind::Time, "t") == doctest::Approx(1.5e-6));
  CHECK(parse_quantity(json(2.0e-6), UnitKind::Time, "t") == doctest::Approx(2e-6));
  CHECK(parse_quantity(json("10 MHz"), UnitKind::Frequency, "f") == doctest::Approx(1e7));
  CHECK(parse_quantity(json("95 mT"), UnitKind::Field, "b") == doctest::Approx(0.095));
  CHECK(parse_quantity(json("10.41 angstrom"), UnitKind::Length, "a") ==
        doctest::Approx(10.41e-10));
  CHECK(parse_quantity(json("12 nm"), UnitKind::Length, "a") == doctest::Approx(12e-9));
  CHECK(parse_quantity(json("90 deg"), UnitKind::Angle, "th") ==
        doctest::Approx(constants::pi / 2));
  CHECK(parse_quantity(json("4 ppm"), UnitKind::Fraction, "c") == doctest::Approx(4e-6));
  CHECK(parse_quantity(json("0.5 %"), UnitKind::Fraction, "c") == doctest::Approx(5e-3));
  CHECK(parse_quantity(json("1e22 cm^-3"), UnitKind::Density, "n") ==
        doctest::Approx(1e28));

  CHECK_THROWS_AS(parse_quantity(json("10 parsec"), UnitKind::Length, "a"), ConfigError);
  CHECK_THROWS_AS(parse_quantity(json("10 ns"), UnitKind::Frequency, "f"), ConfigError);
  CHECK_THROWS_AS(parse_quantity(json("abc"), UnitKind::Time, "t"), ConfigError);
  CHECK_THROWS_AS(parse_quantity(json(true), UnitKind::Time, "t"), ConfigError);
}

TEST_CASE("sweep directions") {
  SweepSpec s;
  s.from = {1, 0, 0};
  s.to = {0, 1, 0};
  s.steps = 19;
  const auto pts = sweep_directions(s);
  REQUIRE(pts.size() == 19);
  CHECK((pts.front().second - Eigen::Vector3d(1, 0, 0)).norm() < 1e-12);
  CHECK((pts.back().second - Eigen::Vector3d(0, 1, 0)).norm() < 1e-12);
  CHECK(pts.front().first == doctest::Approx(0.0));
  CHECK(pts.back().first == doctest::Approx(constants::pi / 2));
  for (const auto& [ang, v] : pts) CHECK(v.norm() == doctest::Approx(1.0));

  SweepSpec bad = s;
  bad.to = {-1, 0, 0};
  CHECK_THROWS_AS(sweep_directions(bad), ConfigError);
}

TEST_CASE("bundled configs load") {
  const auto cfg = load_config("configs/er_yso.json");
  CHECK(cfg.g.gz == doctest::Approx(14.65));
  CHECK(cfg.field_tesla == doctest::Approx(0.095));
  CHECK(cfg.sweep.has_value());
  CHECK(cfg.sweep->steps == 19);
  CHECK(cfg.ensemble.concentration == doctest::Approx(4e-6));
  CHECK(cfg.ensemble.site_density == doctest::Approx(9.38382e27).epsilon(1e-4));
  CHECK(cfg.ensemble.eta == doctest::Approx(0.68));
  CHECK(cfg.ensemble.lattice.has_value());
  REQUIRE(cfg.ensemble.bath_species.size() == 2);
  CHECK(cfg.ensemble.bath_species[0].g.has_value());
  CHECK_FALSE(cfg.ensemble.bath_species[1].g.has_value());
  CHECK(cfg.ensemble.bath_species[1].moment < 0.0);
  REQUIRE(cfg.sequences.size() == 3);
  CHECK(cfg.sequences[0].kind == SequenceKind::HahnEcho);
  CHECK(cfg.sequences[1].kind == SequenceKind::Droid60);
  CHECK(cfg.sequences[2].params.c_target == doctest::Approx(0.0));
  CHECK(cfg.inhomogeneous_fwhm == doctest::Approx(1e7));
  CHECK(cfg.fidelity.has_value());
  CHECK(cfg.fidelity->omega == doctest::Approx(2 * constants::pi * 14.9e6));
  CHECK(cfg.noise.has_value());
  CHECK(cfg.noise->model.correlation_time == doctest::Approx(1e-4));
  CHECK(cfg.cluster.has_value());
  CHECK(cfg.cluster->positions.size() == 3);
  CHECK(cfg.cluster->total_time == doctest::Approx(6e-6));
  // rows of the frame rotation are orthonormal lab-frame axes
  CHECK((cfg.frame_rotation * cfg.frame_rotation.transpose() -
         Eigen::Matrix3d::Identity())
            .norm() < 1e-6);
  // the resolved echo must carry SI values for reproducibility headers
  CHECK(cfg.resolved.contains("ensemble"));

  const auto ex = load_config("configs/example.json");
  CHECK(ex.ensemble.site_density == doctest::Approx(1e28));
  CHECK(ex.sequences.size() == 2);
}

TEST_CASE("field direction rotates into the g basis") {
  const auto cfg = load_config("configs/er_yso.json");
  const auto b = cfg.field_in_g_basis(cfg.field_direction);
  // the bundled field is along the z eigenaxis of the rotation
  CHECK(b.z() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(b.x()) < 1e-9);
}

TEST_CASE("missing file and parse errors") {
  CHECK_THROWS_AS(load_config("nonexistent.json"), ConfigError);
  const auto bad = write_temp("{ not json");
  CHECK_THROWS_AS(load_config(bad), ConfigError);
  std::remove(bad.c_str());
}

TEST_CASE("errors are aggregated") {
  const auto path = write_temp(R"({
    "g_tensor": [1.0, -2.0, 3.0],
    "field": { "direction": [0, 0, 1], "magnitude": "95 furlong" },
    "ensemble": { "concentration": "4 ppm", "site_density": "1e28 m^-3" },
    "sequences": [ { "kind": "quantum_magic", "spacing": "1 us" } ]
  })");
  try {
    load_config(path);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("g_tensor") != std::string::npos);
    CHECK(msg.find("furlong") != std::string::npos);
    CHECK(msg.find("quantum_magic") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("non orthonormal rotation is rejected") {
  const auto path = write_temp(R"({
    "g_tensor": [1.0, 2.0, 3.0],
    "frame_rotation": [[1,0,0],[0,1,0],[0,1,0]],
    "field": { "direction": [0, 0, 1] },
    "ensemble": { "concentration": "4 ppm", "site_density": "1e28 m^-3" },
    "sequences": [ { "kind": "hahn_echo", "spacing": "1 us" } ]
  })");
  CHECK_THROWS_AS(load_config(path), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("defaults and labels") {
  const auto path = write_temp(R"({
    // comments are fine
    "g_tensor": [2.0, 2.0, 2.0],
    "field": { "direction": [0, 0, 1] },
    "ensemble": { "concentration": "1 ppm", "site_density": "1e28 m^-3" },
    "sequences": [ { "kind": "xy8", "spacing": "1 us" },
                   { "kind": "xy8", "spacing": "2 us" } ]
  })");
  const auto cfg = load_config(path);
  CHECK(cfg.frame_rotation.isApprox(Eigen::Matrix3d::Identity()));
  CHECK(cfg.ensemble.eta == doctest::Approx(1.0));
  CHECK_FALSE(cfg.sweep.has_value());
  CHECK_FALSE(cfg.fidelity.has_value());
  // duplicate kinds get distinct default labels
  CHECK(cfg.sequences[0].label != cfg.sequences[1].label);
  std::remove(path.c_str());
}
