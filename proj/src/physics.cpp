#include "magest/physics.hpp"

#include "magest/gaussian.hpp"

#include <cmath>
#include <limits>

namespace magest {

double PhysicsParams::kappa_sqrt_tau() const { return std::sqrt(kappa_sq * tau); }

void PhysicsParams::validate() const
{
    if (!(kappa_sq > 0.0) || !std::isfinite(kappa_sq)) throw ContractError("kappa_sq must be > 0");
    if (!(mu > 0.0) || !std::isfinite(mu)) throw ContractError("mu must be > 0");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ContractError("tau must be > 0");
    if (!(delta_b0 > 0.0) || !std::isfinite(delta_b0)) throw ContractError("delta_b0 must be > 0");
}

std::vector<std::string> PhysicsParams::warnings() const
{
    std::vector<std::string> w;
    if (kappa_sq * tau >= 0.05) {
        w.push_back("kappa_sq * tau = " + std::to_string(kappa_sq * tau) +
                    " is not small (>= 0.05); first-order segment updates lose accuracy");
    }
    return w;
}

void OUParams::validate() const
{
    if (!(gamma_b >= 0.0) || !std::isfinite(gamma_b)) throw ContractError("gamma_b must be >= 0");
    if (!(sigma_b >= 0.0) || !std::isfinite(sigma_b)) throw ContractError("sigma_b must be >= 0");
}

PhysicsParams table1_params() { return PhysicsParams{}; }

Constituents table1_constituents() { return Constituents{}; }

double compute_kappa_sq(const PhysicsParams& params)
{
    if (!params.constituents) {
        throw ContractError("compute_kappa_sq: constituents missing; set kappa_sq directly instead");
    }
    const Constituents& k = *params.constituents;
    const double omega = 2.0 * constants::pi * constants::c / k.wavelength;
    const double prefactor = k.dipole * k.dipole * omega /
        (constants::hbar * k.detuning() * k.area * constants::c * constants::epsilon0);
    const double kappa = prefactor * std::sqrt(k.n_atoms * k.photon_flux);
    return kappa * kappa;
}

Eigen::Matrix4d interaction_map_4(const PhysicsParams& params)
{
    const double k = params.kappa_sqrt_tau();
    Eigen::Matrix4d S = Eigen::Matrix4d::Identity();
    S(0, 3) = k; // x_at += k p_ph
    S(2, 1) = k; // x_ph += k p_at
    return S;
}

Eigen::Vector4d larmor_offset(const PhysicsParams& params, double field)
{
    return Eigen::Vector4d(0.0, -params.mu * params.tau * field, 0.0, 0.0);
}

Eigen::Matrix<double, 5, 5> interaction_map_5(const PhysicsParams& params)
{
    const double k = params.kappa_sqrt_tau();
    Eigen::Matrix<double, 5, 5> S = Eigen::Matrix<double, 5, 5>::Identity();
    S(1, 4) = k;
    S(2, 0) = -params.mu * params.tau;
    S(3, 2) = k;
    return S;
}

OUMaps ou_maps(const OUParams& ou, double tau)
{
    ou.validate();
    if (ou.gamma_b * tau >= 1.0) {
        throw ContractError("ou_maps: gamma_b * tau >= 1, first-order damping is invalid");
    }
    OUMaps maps;
    // Only the field coordinate is damped. The atom and light blocks pass
    // through unchanged; zeroing them would discard all atom-field correlation.
    maps.damping = Eigen::Matrix<double, 5, 5>::Identity();
    maps.damping(0, 0) = 1.0 - ou.gamma_b * tau;
    maps.diffusion = Eigen::Matrix<double, 5, 5>::Zero();
    maps.diffusion(0, 0) = ou_gamma_diffusion(ou, tau);
    return maps;
}

double ou_step_stddev(const OUParams& ou, double tau)
{
    if (ou.gamma_b == 0.0) return std::sqrt(ou.sigma_b * tau);
    const double var = ou.sigma_b * -std::expm1(-2.0 * ou.gamma_b * tau) / (2.0 * ou.gamma_b);
    return std::sqrt(var);
}

double ou_step(double field, const OUParams& ou, double tau, Random& rng)
{
    const double decay = std::exp(-ou.gamma_b * tau);
    return field * decay + ou_step_stddev(ou, tau) * rng.normal();
}

double ou_steady_variance(const OUParams& ou)
{
    if (ou.gamma_b == 0.0) return std::numeric_limits<double>::infinity();
    return ou.sigma_b / (2.0 * ou.gamma_b);
}

Extrapolation ou_extrapolate(double mean, double variance, const OUParams& ou, double dt)
{
    if (!(dt >= 0.0)) throw ContractError("ou_extrapolate: dt must be >= 0");
    const double decay2 = std::exp(-2.0 * ou.gamma_b * dt);
    double diffusion;
    if (ou.gamma_b == 0.0) {
        diffusion = ou.sigma_b * dt;
    } else {
        diffusion = ou.sigma_b / (2.0 * ou.gamma_b) * -std::expm1(-2.0 * ou.gamma_b * dt);
    }
    return {mean * std::exp(-ou.gamma_b * dt), variance * decay2 + diffusion};
}

} // namespace magest
