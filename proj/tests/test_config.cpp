#include <gtest/gtest.h>

#include "sbt/config.hpp"

using namespace sbt;

namespace {
const std::string paper_cfg = std::string(SBT_SOURCE_DIR) + "/paper.cfg";
}

TEST(Config, ShippedFileMatchesDefaults) {
    const RunConfig c = load_config(paper_cfg);
    const auto d = SystemParams::paper_defaults();
    EXPECT_NEAR(c.params.omega_m, d.omega_m, 1e-9);
    EXPECT_NEAR(c.params.kappa, d.kappa, 1e-9);
    EXPECT_NEAR(c.params.kappa_in / c.params.kappa, 0.4, 1e-15);
    EXPECT_NEAR(c.params.g0, d.g0, 1e-12);
    EXPECT_DOUBLE_EQ(c.params.mass_eff, 43e-12);
    EXPECT_DOUBLE_EQ(c.params.lambda_laser, 1064e-9);
    EXPECT_DOUBLE_EQ(c.probe.power, 32e-6);
    EXPECT_NEAR(angular_to_hz(*c.probe.detuning), -6.5e3, 1e-9);
    EXPECT_DOUBLE_EQ(c.lo.power, 1.57e-3);
    EXPECT_NEAR(*c.cooling.detuning, -c.params.omega_m, 1e-9);
    EXPECT_EQ(c.pcl_list_w.size(), 10u);
}

TEST(Config, EmptyTextGivesDefaults) {
    const RunConfig c = parse_config("");
    EXPECT_TRUE(c == RunConfig{});
    EXPECT_DOUBLE_EQ(c.params.alpha, 0.498);
}

TEST(Config, OutOfRangeEtaNamesEta) {
    try {
        parse_config("eta = 1.2\n");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "eta");
    }
}

TEST(Config, ParseErrors) {
    EXPECT_THROW(parse_config("omega_m_hz 705.2e3\n"), ParseError);
    EXPECT_THROW(parse_config("no_such_key = 1\n"), ParseError);
    EXPECT_THROW(parse_config("omega_m_hz = fast\n"), ParseError);
    EXPECT_THROW(parse_config("omega_m_hz = 1\nomega_m_hz = 2\n"), ParseError);
    EXPECT_THROW(parse_config("omega_m_hz = 1\nomega_m_rad_s = 2\n"), ParseError);
    EXPECT_THROW(parse_config("{\"omega_m_hz\": }"), ParseError);
    EXPECT_THROW(load_config("/nonexistent/file.cfg"), ParseError);
}

TEST(Config, CommentsAndUnits) {
    const RunConfig c = parse_config("# comment\n  g0_hz = 4.4   # trailing\n\nkappa_rad_s = 1e6\n");
    EXPECT_NEAR(c.params.g0, hz_to_angular(4.4), 1e-12);
    EXPECT_DOUBLE_EQ(c.params.kappa, 1e6);
}

TEST(Config, JsonEquivalent) {
    const RunConfig a = parse_config("g0_hz = 3\npcl_list_w = 0, 1e-4\ncontaminants = false\nseed = 7\n");
    const RunConfig b = parse_config(R"({"g0_hz": 3, "pcl_list_w": [0, 1e-4], "contaminants": false, "seed": 7})");
    EXPECT_TRUE(a == b);
}

TEST(Config, SaveLoadRoundTrip) {
    RunConfig c = load_config(paper_cfg);
    EXPECT_TRUE(parse_config(save_config(c)) == c);

    c.params.g0 = hz_to_angular(2.2 * 1.0000001);
    c.params.eta = 0.123456789;
    c.thermo = ThermoModel(TabulatedThermo{{0.0, 1e-4, 5e-4}, {0.3, 0.4, 0.7}, {0.6, 0.8, 1.2}});
    c.weighting = Weighting::unweighted;
    c.alpha_reference = AlphaReference::blue_area;
    c.alpha_weighted = true;
    c.seed = 123456789012345ULL;
    EXPECT_TRUE(parse_config(save_config(c)) == c);
}

TEST(Config, ThermoMustKeepPotBelowStage) {
    EXPECT_THROW(parse_config("thermo_pot0_k = 0.7\nthermo_stage0_k = 0.6\n"), ValidationError);
    EXPECT_THROW(parse_config("thermo_pot_slope_k_per_w = 2000\nthermo_stage_slope_k_per_w = 1000\n"),
                 ValidationError);
}
