#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "sbt/cavity.hpp"
#include "sbt/params.hpp"

namespace sbt {

// |Delta| below this fraction of omega_m has no defined backaction occupancy.
inline constexpr double degenerate_detuning_fraction = 1e-6;

struct BeamDynamics {
    BeamRole role = BeamRole::probe;
    double detuning = 0.0;     // rad/s
    double g = 0.0;            // g0 sqrt(n_cav), rad/s
    double gamma_opt = 0.0;    // optical damping, rad/s
    double delta_omega = 0.0;  // optical spring shift, rad/s
    // Stokes scattering (heating) rate A+. Equals n_min * gamma_opt and stays
    // finite at zero detuning where n_min diverges.
    double heating_rate = 0.0;
    std::optional<double> n_min;  // empty when the detuning is degenerate

    double require_n_min() const;
};

// -((omega_m + Delta)^2 + (kappa/2)^2) / (4 omega_m Delta)
inline double backaction_occupancy(const SystemParams& p, double detuning) {
    if (std::abs(detuning) < degenerate_detuning_fraction * p.omega_m)
        throw DegenerateDetuningError("backaction occupancy is undefined at zero detuning");
    const double s = p.omega_m + detuning;
    return -(s * s + 0.25 * p.kappa * p.kappa) / (4.0 * p.omega_m * detuning);
}

inline double BeamDynamics::require_n_min() const {
    if (!n_min) throw DegenerateDetuningError("backaction occupancy is undefined at zero detuning");
    return *n_min;
}

// Weak-coupling, adiabatic optical damping and spring of a single beam.
inline BeamDynamics beam_dynamics(const SystemParams& p, const BeamConfig& beam) {
    if (beam.role == BeamRole::local_oscillator || !beam.detuning)
        throw ValidationError("role", "beam dynamics requires a probe or cooling beam");
    const CavityResponse cav = CavityResponse::from(p);
    const double d = *beam.detuning;
    const double n_cav = intracavity_photons(cav, beam, p.lambda_laser);
    const double g2 = p.g0 * p.g0 * n_cav;
    const double hk2 = 0.25 * p.kappa * p.kappa;
    const double up = d + p.omega_m;
    const double dn = d - p.omega_m;
    const double lor_up = 1.0 / (hk2 + up * up);
    const double lor_dn = 1.0 / (hk2 + dn * dn);

    BeamDynamics out;
    out.role = beam.role;
    out.detuning = d;
    out.g = std::sqrt(g2);
    out.gamma_opt = g2 * p.kappa * (lor_up - lor_dn);
    out.delta_omega = g2 * (up * lor_up + dn * lor_dn);
    out.heating_rate = g2 * p.kappa * lor_dn;
    if (std::abs(d) >= degenerate_detuning_fraction * p.omega_m) out.n_min = backaction_occupancy(p, d);
    return out;
}

struct EffectiveMode {
    double omega_m = 0.0;
    double gamma_m = 0.0;
    double omega_tilde = 0.0;
    double gamma_tilde = 0.0;
    std::vector<BeamDynamics> contributions;

    double gamma_opt(BeamRole role) const {
        double sum = 0.0;
        for (const auto& c : contributions)
            if (c.role == role) sum += c.gamma_opt;
        return sum;
    }
};

inline EffectiveMode effective_mode(const SystemParams& p, std::span<const BeamConfig> beams) {
    EffectiveMode m;
    m.omega_m = p.omega_m;
    m.gamma_m = p.gamma_m;
    m.omega_tilde = p.omega_m;
    m.gamma_tilde = p.gamma_m;
    int probes = 0, coolers = 0;
    for (const auto& b : beams) {
        if (b.role == BeamRole::local_oscillator) continue;
        if (b.role == BeamRole::probe && ++probes > 1)
            throw ValidationError("beams", "at most one probe beam");
        if (b.role == BeamRole::cooling && ++coolers > 1)
            throw ValidationError("beams", "at most one cooling beam");
        BeamDynamics bd = beam_dynamics(p, b);
        m.omega_tilde += bd.delta_omega;
        m.gamma_tilde += bd.gamma_opt;
        m.contributions.push_back(bd);
    }
    return m;
}

// Damping-weighted occupancy
//   n = (n_bath gamma_m + sum_beams n_beam gamma_beam) / gamma_tilde
// with n_bath = k_B T_bath / (hbar omega_tilde). Each n_beam gamma_beam is
// evaluated as the beam's Stokes rate, which is algebraically identical.
inline double phonon_balance(const SystemParams& p, const EffectiveMode& mode, double T_bath) {
    if (!(mode.gamma_tilde > 0.0))
        throw ValidationError("gamma_tilde", "total damping must be > 0");
    double num = bath_occupancy(T_bath, mode.omega_tilde) * p.gamma_m;
    for (const auto& c : mode.contributions) num += c.heating_rate;
    return num / mode.gamma_tilde;
}

// Bath temperature for which phonon_balance returns target_nbar.
inline double solve_bath_temperature(const SystemParams& p, const EffectiveMode& mode, double target_nbar) {
    const double backaction = phonon_balance(p, mode, 0.0);
    if (target_nbar < backaction)
        throw ValidationError("n_bar", "target is below the backaction limit of the drive beams");
    const double n_bath = (target_nbar - backaction) * mode.gamma_tilde / p.gamma_m;
    return n_bath * PhysicalConstants::hbar * mode.omega_tilde / PhysicalConstants::k_B;
}

}  // namespace sbt
