#pragma once

#include <cstdint>
#include <string>

#include "sbt/error.hpp"
#include "sbt/parallel.hpp"
#include "sbt/rng.hpp"
#include "sbt/spectrum.hpp"

namespace sbt {

struct NoiseSettings {
    std::uint64_t seed = 1;
    int n_avg = 100;

    void validate() const {
        if (n_avg < 1) throw ValidationError("n_avg", "must be >= 1");
    }
};

// Draws one averaged-periodogram realisation of the model:
//   S_meas = S_model X / (2M),  X ~ chi^2 with 2M degrees of freedom,
// i.e. S_model Gamma(M, 1) / M. Each bin has its own stream keyed by
// (seed, side, bin index), so output does not depend on `threads`.
inline SidebandSpectrum synthesize(const SidebandSpectrum& model, const NoiseSettings& settings,
                                   unsigned threads = 1) {
    settings.validate();
    for (double v : model.psd)
        if (!(v > 0.0)) throw ValidationError("psd", "model bins must be > 0 to synthesize noise");
    SidebandSpectrum out = model;
    out.n_avg = settings.n_avg;
    out.metadata["seed"] = std::to_string(settings.seed);
    out.metadata["rng"] = rng_algorithm;
    const std::uint64_t stream = model.side == Side::red ? 1 : 2;
    const double m = settings.n_avg;
    parallel_for(model.psd.size(), threads, [&](std::size_t i) {
        Xoshiro256 gen(derive_key(settings.seed, stream, i));
        out.psd[i] = model.psd[i] * gen.gamma(m) / m;
    });
    return out;
}

}  // namespace sbt
