#pragma once

#include "sbt/params.hpp"

namespace sbt {

struct CavityResponse {
    double kappa;     // rad/s
    double kappa_in;  // rad/s

    static CavityResponse from(const SystemParams& p) { return {p.kappa, p.kappa_in}; }

    void validate() const {
        if (!(kappa > 0.0)) throw ValidationError("kappa", "must be > 0");
        if (!(kappa_in > 0.0 && kappa_in <= kappa))
            throw ValidationError("kappa_in", "must satisfy 0 < kappa_in <= kappa");
    }
};

// Normalized cavity power response (kappa/2)^2 / ((kappa/2)^2 + delta^2).
inline double lorentzian_response(const CavityResponse& r, double delta) {
    const double hk2 = 0.25 * r.kappa * r.kappa;
    return hk2 / (hk2 + delta * delta);
}

// Steady-state photon number of a drive beam. Local oscillators are
// treated as far off resonance and contribute none.
inline double intracavity_photons(const CavityResponse& r, const BeamConfig& beam, double lambda) {
    if (!beam.detuning) return 0.0;
    const double flux = beam.power / laser_photon_energy(lambda);
    const double d = *beam.detuning;
    return r.kappa_in * flux / (d * d + 0.25 * r.kappa * r.kappa);
}

struct FilterPair {
    double red;   // response at delta_probe - omega_m (Stokes)
    double blue;  // response at delta_probe + omega_m (anti-Stokes)
};

inline FilterPair sideband_filter_pair(const CavityResponse& r, double delta_probe, double omega_m) {
    return {lorentzian_response(r, delta_probe - omega_m),
            lorentzian_response(r, delta_probe + omega_m)};
}

}  // namespace sbt
