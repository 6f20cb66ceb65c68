#pragma once

#include <span>

#include "sbt/cavity.hpp"
#include "sbt/params.hpp"
#include "sbt/spectrum.hpp"

namespace sbt {

struct DetectionChannel {
    double gain = 0.0;
    double dark = 0.0;          // detector units^2/Hz
    double shot = 0.0;          // detector units^2/Hz
    double filter = 0.0;        // cavity response at the sideband frequency
    double transduction = 0.0;  // C: photocurrent PSD per displacement PSD

    double floor_sii() const { return dark + shot; }
    // Imprecision floor referred to displacement, shot plus dark.
    double floor_x() const { return floor_sii() / transduction; }
    double shot_x() const { return shot / transduction; }
    double dark_x() const { return dark / transduction; }
};

struct DetectionLayer {
    double t_abs = 0.0;    // absolute transduction scale
    double p_total = 0.0;  // optical power on the photodiode, W
    DetectionChannel red;
    DetectionChannel blue;

    const DetectionChannel& channel(Side s) const { return s == Side::red ? red : blue; }
};

struct DriveSet {
    const BeamConfig* probe = nullptr;
    const BeamConfig* lo = nullptr;
    const BeamConfig* cooling = nullptr;
};

inline DriveSet classify_beams(std::span<const BeamConfig> beams) {
    DriveSet d;
    for (const auto& b : beams) {
        const BeamConfig** slot = b.role == BeamRole::probe     ? &d.probe
                                  : b.role == BeamRole::cooling ? &d.cooling
                                                                : &d.lo;
        if (*slot) throw ValidationError(std::string(to_string(b.role)), "beam given more than once");
        *slot = &b;
    }
    return d;
}

// Heterodyne beat of the probe's motional sideband against the LO, per unit
// displacement PSD, before gain, efficiency and sideband filtering:
//
//   T_abs = 4 P_LO (hbar omega_L) kappa_in G_om^2 n_cav / (kappa/2)^2,
//
// with G_om = g0 / x_zp the frequency pull per metre and n_cav the probe's
// intracavity photon number at its detuning. Units: W^2 per m^2.
inline double transduction_scale(const SystemParams& p, const BeamConfig& probe, const BeamConfig& lo) {
    const CavityResponse cav = CavityResponse::from(p);
    const double n_cav = intracavity_photons(cav, probe, p.lambda_laser);
    const double g_om = p.g0 / zero_point_amplitude(p);
    const double hk2 = 0.25 * p.kappa * p.kappa;
    return 4.0 * lo.power * laser_photon_energy(p.lambda_laser) * p.kappa_in * g_om * g_om * n_cav / hk2;
}

inline DetectionLayer detection_layer(const SystemParams& p, std::span<const BeamConfig> beams) {
    const DriveSet d = classify_beams(beams);
    if (!d.probe) throw ValidationError("beams", "detection requires a probe beam");
    if (!d.lo) throw ValidationError("beams", "detection requires a local oscillator");
    DetectionLayer L;
    L.t_abs = transduction_scale(p, *d.probe, *d.lo);
    L.p_total = d.lo->power + p.reflect_probe * d.probe->power + (d.cooling ? p.reflect_cl * d.cooling->power : 0.0);
    const FilterPair phi = sideband_filter_pair(CavityResponse::from(p), *d.probe->detuning, p.omega_m);
    auto fill = [&](double gain, double dark, double filter) {
        DetectionChannel c;
        c.gain = gain;
        c.dark = dark;
        c.shot = p.shot_coeff * gain * L.p_total;
        c.filter = filter;
        c.transduction = L.t_abs * gain * p.eta * filter;
        return c;
    };
    L.red = fill(p.gain_red, p.dark_red, phi.red);
    L.blue = fill(p.gain_blue, p.dark_blue, phi.blue);
    return L;
}

// S_II = floor_II + C (S_xx - b). Because floor_II = C b, a spectrum whose
// floor is the imprecision floor maps to C S_xx.
inline SidebandSpectrum detection_forward(const DetectionLayer& L, const SidebandSpectrum& sxx) {
    if (sxx.units != Units::displacement) throw ValidationError("units", "detection_forward expects displacement units");
    const DetectionChannel& ch = L.channel(sxx.side);
    SidebandSpectrum out = sxx;
    out.units = Units::photocurrent;
    for (auto& v : out.psd) v = ch.floor_sii() + ch.transduction * (v - ch.floor_x());
    return out;
}

inline SidebandSpectrum detection_forward(const SystemParams& p, const SidebandSpectrum& sxx,
                                          std::span<const BeamConfig> beams) {
    return detection_forward(detection_layer(p, beams), sxx);
}

// Exact inverse on the Lorentzian part. Dark noise is kept in the floor.
inline SidebandSpectrum detection_inverse(const DetectionLayer& L, const SidebandSpectrum& sii) {
    if (sii.units != Units::photocurrent) throw ValidationError("units", "detection_inverse expects photocurrent units");
    const DetectionChannel& ch = L.channel(sii.side);
    if (!(ch.transduction > 0.0)) throw CalibrationError("transduction coefficient must be > 0");
    SidebandSpectrum out = sii;
    out.units = Units::displacement;
    for (auto& v : out.psd) v = ch.floor_x() + (v - ch.floor_sii()) / ch.transduction;
    return out;
}

inline SidebandSpectrum detection_inverse(const SystemParams& p, const SidebandSpectrum& sii,
                                          std::span<const BeamConfig> beams) {
    return detection_inverse(detection_layer(p, beams), sii);
}

}  // namespace sbt
