#pragma once

// CODATA 2018 values. All internal computation is SI.
namespace spinsim::constants {

inline constexpr double mu_B = 9.2740100783e-24;   // Bohr magneton [J/T]
inline constexpr double mu_N = 5.0507837461e-27;   // nuclear magneton [J/T]
inline constexpr double h = 6.62607015e-34;        // Planck constant [J s]
inline constexpr double hbar = 1.054571817e-34;    // reduced Planck constant [J s]
inline constexpr double mu_0 = 1.25663706212e-6;   // vacuum permeability [N/A^2]
inline constexpr double k_B = 1.380649e-23;        // Boltzmann constant [J/K]

inline constexpr double pi = 3.14159265358979323846;

}  // namespace spinsim::constants
