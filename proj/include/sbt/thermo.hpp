#pragma once

#include <algorithm>
#include <string>
#include <variant>
#include <vector>

#include "sbt/error.hpp"

namespace sbt {

struct ThermoReading {
    double T_pot = 0.0;    // K
    double T_stage = 0.0;  // K
};

// T(P) = T0 + slope * P for each thermometer.
struct AffineThermo {
    double pot0 = 0.0;
    double pot_slope = 0.0;  // K/W
    double stage0 = 0.0;
    double stage_slope = 0.0;  // K/W
    friend bool operator==(const AffineThermo&, const AffineThermo&) = default;
};

// Piecewise-linear in cooling power; no extrapolation.
struct TabulatedThermo {
    std::vector<double> power;  // W, strictly increasing
    std::vector<double> pot;    // K
    std::vector<double> stage;  // K
    friend bool operator==(const TabulatedThermo&, const TabulatedThermo&) = default;
};

class ThermoModel {
public:
    ThermoModel() : model_(AffineThermo{}) {}
    explicit ThermoModel(AffineThermo a) : model_(a) { validate(); }
    explicit ThermoModel(TabulatedThermo t) : model_(std::move(t)) { validate(); }

    static ThermoModel constant(double T_pot, double T_stage) { return ThermoModel(AffineThermo{T_pot, 0.0, T_stage, 0.0}); }

    // Laser-heating curves with T_bath(415 uW) such that the damping balance
    // gives n = 0.84 at the published parameters and alpha = 0.498.
    // Fitted to the published minimum, not measured.
    static ThermoModel paper_default() { return ThermoModel(AffineThermo{0.30, 1200.0, 0.60, 1451.5916}); }

    bool is_affine() const { return std::holds_alternative<AffineThermo>(model_); }
    const AffineThermo& affine() const { return std::get<AffineThermo>(model_); }
    const TabulatedThermo& table() const { return std::get<TabulatedThermo>(model_); }

    // Requires T_pot < T_stage everywhere the model is defined for P >= 0.
    void validate() const {
        if (const auto* a = std::get_if<AffineThermo>(&model_)) {
            if (!(a->pot0 >= 0.0)) throw ValidationError("thermo_pot0_k", "must be >= 0");
            if (!(a->pot0 < a->stage0)) throw ValidationError("thermo", "T_pot < T_stage violated at zero power");
            if (a->pot_slope > a->stage_slope)
                throw ValidationError("thermo", "T_pot < T_stage violated at high power (pot slope exceeds stage slope)");
            return;
        }
        const auto& t = std::get<TabulatedThermo>(model_);
        if (t.power.empty() || t.power.size() != t.pot.size() || t.power.size() != t.stage.size())
            throw ValidationError("thermo_table", "power, pot and stage columns must be non-empty and equal length");
        for (std::size_t i = 0; i < t.power.size(); ++i) {
            if (i && !(t.power[i] > t.power[i - 1]))
                throw ValidationError("thermo_table_power_w", "must be strictly increasing");
            if (!(t.pot[i] >= 0.0)) throw ValidationError("thermo_table_pot_k", "must be >= 0");
            if (!(t.pot[i] < t.stage[i])) throw ValidationError("thermo_table", "T_pot < T_stage violated");
        }
    }

    ThermoReading operator()(double p_cl) const {
        if (const auto* a = std::get_if<AffineThermo>(&model_))
            return {a->pot0 + a->pot_slope * p_cl, a->stage0 + a->stage_slope * p_cl};
        const auto& t = std::get<TabulatedThermo>(model_);
        if (p_cl < t.power.front() || p_cl > t.power.back())
            throw ExtrapolationError("cooling power " + std::to_string(p_cl) + " W lies outside the thermometer table");
        if (t.power.size() == 1) return {t.pot[0], t.stage[0]};
        auto it = std::upper_bound(t.power.begin(), t.power.end(), p_cl);
        std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - t.power.begin()), t.power.size() - 1);
        std::size_t lo = hi - 1;
        const double u = (p_cl - t.power[lo]) / (t.power[hi] - t.power[lo]);
        return {t.pot[lo] + u * (t.pot[hi] - t.pot[lo]), t.stage[lo] + u * (t.stage[hi] - t.stage[lo])};
    }

    friend bool operator==(const ThermoModel&, const ThermoModel&) = default;

private:
    std::variant<AffineThermo, TabulatedThermo> model_;
};

inline ThermoReading thermo_model(double p_cl, const ThermoModel& m) { return m(p_cl); }

}  // namespace sbt
