#include <gtest/gtest.h>

#include <cmath>

#include "pmt/io.hpp"
#include "test_util.hpp"

namespace pmt {
namespace {

using nlohmann::json;

TEST(Io, NumbersAndPoints) {
    EXPECT_TRUE(io::number(std::nan("")).is_null());
    EXPECT_TRUE(io::number(INFINITY).is_null());
    EXPECT_EQ(io::number(0.5), json(0.5));
    EXPECT_EQ(io::parse_point(json(0.25)), Point(0.25));
    EXPECT_EQ(io::parse_point(json::array({1.0, 2.0})), Point(std::vector<double>{1.0, 2.0}));
    EXPECT_EQ(io::parse_point_text("0.5,1"), Point(std::vector<double>{0.5, 1.0}));
    EXPECT_THROW((void)io::parse_point_text("0.5,abc"), InvalidInput);
    EXPECT_THROW((void)io::parse_point_text(""), InvalidInput);
}

TEST(Io, BoxRoundTrip) {
    const Box b = Box::open(0.0, 1.0);
    EXPECT_EQ(io::box(io::parse_box(io::box(b))), io::box(b));
    EXPECT_EQ(io::box(io::parse_box(json::array({json::array({0.0, 2.0})}))),
              io::box(Box::closed(0.0, 2.0)));
    EXPECT_THROW((void)io::parse_box(json::array({json::array({0.0})})), InvalidInput);
}

TEST(Io, SpaceRoundTrip) {
    const auto s = testing::e2_space();
    const auto j = io::space(s);
    const auto back = io::parse_space(j);
    EXPECT_EQ(io::space(back).dump(), j.dump());
    EXPECT_EQ(back.coeff_K(), 2.0);
    EXPECT_EQ(eval_distance(back, Point(0.25), Point(0.75)), 2.25);
}

TEST(Io, SpaceByFixtureName) {
    const json j = {{"oracle", "E1-maxpow"}, {"K", 4.0}, {"domain", {{0.0, 10.0}}}};
    const auto s = io::parse_space(j);
    EXPECT_EQ(eval_distance(s, Point(1.0), Point(2.0)), 5.0);
}

TEST(Io, TraceCsvFormat) {
    IterationTrace t;
    t.iterates = {Point(1.0), Point(0.5)};
    t.step_dist = {0.5};
    t.self_dist = {0.0, 0.0};
    t.hypothesis_slack = {std::nan("")};
    EXPECT_EQ(io::trace_csv(t),
              "n,x0,step_dist,self_dist,hypothesis_slack\n"
              "0,1,0.5,0,\n"
              "1,0.5,,0,\n");
    EXPECT_EQ(io::csv_number(0.1), "0.10000000000000001");
}

TEST(Io, MapAndFamilyConfigs) {
    const auto m = io::parse_map({{"op", "affine"}, {"scale", 0.5}, {"shift", 0.25}});
    EXPECT_EQ(m(Point(1.0)), Point(0.75));
    EXPECT_EQ(io::parse_map({{"op", "const"}, {"value", 3.0}})(Point(1.0)), Point(3.0));
    EXPECT_THROW((void)io::parse_map({{"op", "rotate"}}), InvalidInput);
    EXPECT_THROW((void)io::parse_map({{"op", "scale"}}), InvalidInput);

    const auto fam = io::parse_family({{"op", "geometric"}, {"base", 2.0}});
    EXPECT_EQ(fam(3)(Point(1.0)), Point(0.125));
    EXPECT_THROW((void)io::parse_family({{"fixture", "E1-maxpow"}}), InvalidInput);

    const auto [family, cfg] = io::parse_family_config(
        {{"family", {{"fixture", "E5-chatterjea-family"}}},
         {"deltas", {{"fixture", "E5-chatterjea-family"}}},
         {"scheme", "chatterjea"},
         {"gate", "relaxed"},
         {"horizon", 100}});
    EXPECT_EQ(cfg.scheme, FamilyScheme::Chatterjea);
    EXPECT_EQ(cfg.gate.kind, GateKind::RelaxedCn);
    EXPECT_EQ(cfg.gate.horizon, 100u);
    EXPECT_EQ(family(1)(Point(0.5)), Point(1.0));
    EXPECT_THROW((void)io::parse_family_config({{"family", {{"op", "geometric"}, {"base", 2}}},
                                                {"deltas", -1.0}}),
                 InvalidInput);
}

TEST(Io, AdmissibleAndPairConfigs) {
    const auto [f, c] = io::parse_admissible(
        {{"f", {{"op", "scale"}, {"factor", 0.5}}}, {"alpha", 2.0}, {"beta", 0.5}});
    EXPECT_EQ(c.C_alpha, 2.0);
    EXPECT_EQ(c.C_beta, 0.5);
    EXPECT_EQ(f(Point(1.0)), Point(0.5));
    const auto p = io::parse_pair({{"T1", {{"op", "identity"}}},
                                   {"T2", {{"op", "scale"}, {"factor", 0.5}}},
                                   {"k", 0.5},
                                   {"r2", 2}});
    EXPECT_EQ(p.r1, 1u);
    EXPECT_EQ(p.r2, 2u);
    EXPECT_THROW((void)io::parse_pair({{"T1", {{"op", "identity"}}},
                                       {"T2", {{"op", "identity"}}},
                                       {"k", 0.5},
                                       {"r1", -1}}),
                 InvalidInput);
}

TEST(Io, PhiAndPsi) {
    EXPECT_EQ(io::parse_phi("sqrt").degree(), 0.5);
    EXPECT_EQ(io::parse_phi({{"power", 0.25}}).degree(), 0.25);
    EXPECT_THROW((void)io::parse_phi("cube"), InvalidInput);
    EXPECT_EQ(io::parse_psi("max", 3).arity(), 3);
    EXPECT_THROW((void)io::parse_psi("min", 2), InvalidInput);
}

}  // namespace
}  // namespace pmt
