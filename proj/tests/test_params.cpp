#include <gtest/gtest.h>

#include <cmath>

#include "oracle_values.hpp"
#include "sbt/config.hpp"
#include "sbt/params.hpp"

using namespace sbt;

TEST(Params, DefaultsCarryPublishedValues) {
    const auto p = SystemParams::paper_defaults();
    EXPECT_DOUBLE_EQ(angular_to_hz(p.omega_m), 705.2e3);
    EXPECT_DOUBLE_EQ(angular_to_hz(p.kappa), 165e3);
    EXPECT_DOUBLE_EQ(angular_to_hz(p.g0), 2.2);
    EXPECT_DOUBLE_EQ(angular_to_hz(p.gamma_m), 0.14);
    EXPECT_DOUBLE_EQ(p.mass_eff, 43e-12);
    EXPECT_DOUBLE_EQ(p.kappa_in / p.kappa, 0.4);
    EXPECT_DOUBLE_EQ(p.lambda_laser, 1064e-9);
    EXPECT_DOUBLE_EQ(p.alpha, 0.498);
    EXPECT_NEAR(p.gain_red / p.gain_blue, 1.005, 1e-15);
    EXPECT_NEAR(p.dark_red / p.dark_blue, 1.015, 1e-15);
    EXPECT_NO_THROW(p.validate());
}

TEST(Params, ValidationNamesTheField) {
    auto p = SystemParams::paper_defaults();
    p.eta = 1.2;
    try {
        p.validate();
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "eta");
    }
    p = SystemParams::paper_defaults();
    p.kappa_in = 1.1 * p.kappa;
    EXPECT_THROW(p.validate(), ValidationError);
    p = SystemParams::paper_defaults();
    p.alpha = -0.1;
    EXPECT_THROW(p.validate(), ValidationError);
    p = SystemParams::paper_defaults();
    p.n_avg = 0;
    EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Params, BeamInvariants) {
    EXPECT_THROW(BeamConfig::probe(-1.0, -1.0).validate(), ValidationError);
    auto lo = BeamConfig::local_oscillator(1e-3);
    EXPECT_FALSE(lo.detuning.has_value());
    lo.detuning = 0.0;
    EXPECT_THROW(lo.validate(), ValidationError);
    EXPECT_EQ(beam_role_from_string(to_string(BeamRole::cooling)), BeamRole::cooling);
}

TEST(Params, ZeroPointAmplitude) {
    const auto p = SystemParams::paper_defaults();
    EXPECT_NEAR(zero_point_amplitude(p) / oracle::x_zp, 1.0, 1e-14);
    const double x = zero_point_amplitude(p.mass_eff, p.omega_m);
    EXPECT_NEAR(zero_point_amplitude(4 * p.mass_eff, p.omega_m), x / 2, 1e-15 * x);
    EXPECT_NEAR(zero_point_amplitude(p.mass_eff, 4 * p.omega_m), x / 2, 1e-15 * x);
}

TEST(Params, ZeroPointScalingInvariant) {
    const double ref = std::sqrt(PhysicalConstants::hbar / 2.0);
    for (double m : {1e-15, 43e-12, 2e-9})
        for (double w : {1e3, 4.4e6, 9e9}) EXPECT_NEAR(zero_point_amplitude(m, w) * std::sqrt(m * w) / ref, 1.0, 1e-14);
}

TEST(Params, BathOccupancy) {
    const double w = hz_to_angular(705.2e3);
    EXPECT_NEAR(bath_occupancy(0.4, w) / oracle::n_bath_0p4K, 1.0, 1e-13);
    EXPECT_NEAR(bath_occupancy(33.83e-6, w), 1.0, 0.005);
    EXPECT_NEAR(bath_occupancy(33.83e-6, w) / oracle::n_bath_33p83uK, 1.0, 1e-13);
    EXPECT_EQ(bath_occupancy(0.0, w), 0.0);
    // Linear in T and inverse in omega.
    EXPECT_NEAR(bath_occupancy(0.8, w), 2.0 * bath_occupancy(0.4, w), 1e-12);
    EXPECT_NEAR(bath_occupancy(0.4, 2 * w), 0.5 * bath_occupancy(0.4, w), 1e-12);
    // Bose form approaches the linear one minus a half at high temperature.
    EXPECT_NEAR(bose_occupancy(0.4, w), bath_occupancy(0.4, w) - 0.5, 1e-3);
}

TEST(Params, PhotonEnergy) {
    EXPECT_NEAR(laser_photon_energy(1064e-9) / oracle::hbar_omega_laser, 1.0, 1e-14);
}

TEST(Params, BathTemperatureWeighting) {
    EXPECT_DOUBLE_EQ(bath_temperature(0.0, 0.3, 0.6), 0.3);
    EXPECT_DOUBLE_EQ(bath_temperature(1.0, 0.3, 0.6), 0.6);
    EXPECT_NEAR(bath_temperature(0.498, 0.798, 1.2024), 0.498 * 1.2024 + 0.502 * 0.798, 1e-15);
}
