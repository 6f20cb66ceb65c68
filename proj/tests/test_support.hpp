#pragma once

#include <optional>

#include "sbt/sweep.hpp"

namespace support {

// Published parameters with the probe detuning and cooling power given.
inline sbt::RunConfig config(double probe_detuning_hz = -6.5e3, double p_cl = 415e-6) {
    sbt::RunConfig c;
    c.probe.detuning = sbt::hz_to_angular(probe_detuning_hz);
    c.cooling.power = p_cl;
    return c;
}

inline sbt::SimulatedPair pair(const sbt::RunConfig& c, std::optional<double> n_bar = {},
                               std::optional<sbt::NoiseSettings> noise = {}) {
    return sbt::simulate_pair(c, c.cooling.power, n_bar, noise);
}

}  // namespace support
