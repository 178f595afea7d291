/**
 * @file physics.hpp
 * @brief Physical parameters, interaction matrices and the Ornstein-Uhlenbeck field.
 *
 * Units: B in pT, time in s. mu is in s^-1 pT^-1 so that mu*tau*B is
 * dimensionless. Coordinates of the 4-variable atom+light state are
 * (x_at, p_at, x_ph, p_ph); the 5-variable state prepends B.
 */
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace magest {

namespace constants {
inline constexpr double c = 299792458.0;          // m/s
inline constexpr double epsilon0 = 8.8541878128e-12; // F/m
inline constexpr double hbar = 1.054571817e-34;   // J s
inline constexpr double pi = 3.14159265358979323846;
} // namespace constants

/// Microscopic quantities the coupling kappa is built from.
struct Constituents {
    double n_atoms = 2e12;
    double photon_flux = 5e14;     // s^-1
    double area = 2e-6;            // m^2
    double wavelength = 852e-9;    // m
    double detuning_hz = 10e9;     // Delta / 2 pi
    double dipole = 2.61e-29;      // C m

    double detuning() const { return 2.0 * constants::pi * detuning_hz; } // rad/s
};

struct PhysicsParams {
    double kappa_sq = 1.83e6;   // s^-1
    double mu = 8.79e4;         // s^-1 pT^-1
    double delta_b0 = 1.0;      // pT
    double tau = 1e-8;          // s
    std::optional<Constituents> constituents;

    double kappa_sqrt_tau() const;
    /// Throws ContractError on invalid values.
    void validate() const;
    /// Non-empty when kappa^2 tau exceeds the small-segment regime (>= 0.05).
    std::vector<std::string> warnings() const;
};

struct OUParams {
    double gamma_b = 1e3;   // s^-1
    double sigma_b = 2e3;   // pT^2 / s

    void validate() const;
};

/// Defaults of the worked cesium example.
PhysicsParams table1_params();
Constituents table1_constituents();

/**
 * kappa^2 from the microscopic constituents:
 *   kappa = d^2 omega / (hbar Delta A c eps0) * sqrt(N_at Phi),  omega = 2 pi c / lambda.
 * Throws when constituents are absent.
 */
double compute_kappa_sq(const PhysicsParams& params);

/// Atom-light map on (x_at, p_at, x_ph, p_ph).
Eigen::Matrix4d interaction_map_4(const PhysicsParams& params);
/// Larmor offset v(B) = (0, -mu tau B, 0, 0).
Eigen::Vector4d larmor_offset(const PhysicsParams& params, double field);

/// Joint map on (B, x_at, p_at, x_ph, p_ph) with the field held in-state.
Eigen::Matrix<double, 5, 5> interaction_map_5(const PhysicsParams& params);

struct OUMaps {
    Eigen::Matrix<double, 5, 5> damping;    // diag(1 - gamma_b tau, 1, 1, 1, 1)
    Eigen::Matrix<double, 5, 5> diffusion;  // diag(2 sigma_b tau, 0, 0, 0, 0)
};

/// First-order OU maps for the 5-variable state. Rejects gamma_b tau >= 1.
OUMaps ou_maps(const OUParams& ou, double tau);

/// Per-step gamma-convention diffusion injected into the field coordinate.
inline double ou_gamma_diffusion(const OUParams& ou, double tau) { return 2.0 * ou.sigma_b * tau; }

/// Seedable normal generator. One per realization.
class Random {
public:
    explicit Random(std::uint64_t seed)
        : engine_(seed)
    {
    }

    double normal() { return normal_(engine_); }
    double normal(double mean, double stddev) { return mean + stddev * normal_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Exact OU transition over tau: B e^{-g tau} + N(0, s (1 - e^{-2 g tau}) / 2g).
double ou_step(double field, const OUParams& ou, double tau, Random& rng);

/// Transition std-dev used by ou_step (tends to sqrt(sigma_b tau) as gamma_b -> 0).
double ou_step_stddev(const OUParams& ou, double tau);

/// sigma_b / (2 gamma_b); +infinity when gamma_b == 0.
double ou_steady_variance(const OUParams& ou);

struct Extrapolation {
    double mean;
    double variance;
};

/// Forward prediction of an estimate (mean, variance) made dt seconds earlier.
Extrapolation ou_extrapolate(double mean, double variance, const OUParams& ou, double dt);

} // namespace magest
