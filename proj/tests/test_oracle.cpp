#include <gtest/gtest.h>

#include "pmt/oracle.hpp"
#include "test_util.hpp"

namespace pmt {
namespace {

TEST(Oracle, BuildersEvaluate) {
    EXPECT_EQ(oracle::abs_diff()(Point({0.0, 3.0}), Point({1.0, 1.0})), 2.0);
    EXPECT_EQ(oracle::pos_diff()(0.2, 0.7), 0.0);
    EXPECT_DOUBLE_EQ(oracle::pos_diff()(0.7, 0.2), 0.5);
    EXPECT_EQ(oracle::max_coord()(0.2, 0.7), 0.7);
    EXPECT_EQ(oracle::power(oracle::max_coord(), 2.0)(0.5, 1.0), 1.0);
    EXPECT_EQ(oracle::affine(oracle::abs_diff(), 2.0, 1.0)(0.0, 0.5), 2.0);
    EXPECT_DOUBLE_EQ(oracle::pt(oracle::max_coord())(0.25, 0.75), 0.5);
    EXPECT_EQ(oracle::dp(testing::e2_oracle())(0.5, 0.5), 0.0);
    EXPECT_DOUBLE_EQ(oracle::basepoint(oracle::abs_diff(), Point(0.0))(0.2, 0.6), 0.6);
}

TEST(Oracle, RejectsBadParameters) {
    EXPECT_THROW(oracle::power(oracle::abs_diff(), 0.0), InvalidInput);
    EXPECT_THROW(oracle::constant(INFINITY), InvalidInput);
    EXPECT_THROW(oracle::sum({}), InvalidInput);
    EXPECT_THROW((void)oracle::abs_diff()(Point(0.0), Point({0.0, 1.0})), InvalidInput);
}

TEST(Oracle, JsonRoundTripPreservesValues) {
    const std::vector<DistanceOracle> all = {
        testing::e1_oracle(),
        testing::e2_oracle(),
        oracle::pt(oracle::max_coord()),
        oracle::dp(oracle::pos_diff()),
        oracle::basepoint(oracle::abs_diff(), Point(0.25)),
        oracle::affine(oracle::power(oracle::abs_diff(), 0.5), 3.0, 0.125),
    };
    for (const auto& o : all) {
        ASSERT_TRUE(o.serializable()) << o.label;
        const auto back = oracle::from_json(nlohmann::json::parse(o.expr.dump()));
        for (double x : {0.0, 0.1, 0.5, 0.9}) {
            for (double y : {0.0, 0.3, 0.7, 1.0}) EXPECT_EQ(o(x, y), back(x, y)) << o.label;
        }
        EXPECT_EQ(back.expr, o.expr);
    }
}

TEST(Oracle, CustomOraclesAreNotSerializable) {
    const auto c = oracle::custom([](const Point&, const Point&) { return 1.0; }, "one");
    EXPECT_FALSE(c.serializable());
    EXPECT_FALSE(oracle::sum({c, oracle::abs_diff()}).serializable());
}

TEST(Oracle, FromJsonErrors) {
    using nlohmann::json;
    EXPECT_THROW(oracle::from_json(json{{"op", "nope"}}), InvalidInput);
    EXPECT_THROW(oracle::from_json(json{{"op", "pow"}, {"exp", 2}}), InvalidInput);
    EXPECT_THROW(oracle::from_json(json{{"op", "const"}, {"value", "x"}}), InvalidInput);
    EXPECT_THROW(oracle::from_json(json(42)), InvalidInput);
    EXPECT_THROW(oracle::from_json(json("E1-maxpow")), InvalidInput);
}

TEST(Oracle, NamedOraclesGoThroughResolver) {
    const auto o = oracle::from_json(nlohmann::json("abs"), [](const std::string& name) {
        EXPECT_EQ(name, "abs");
        return oracle::abs_diff();
    });
    EXPECT_EQ(o(0.25, 0.75), 0.5);
}

}  // namespace
}  // namespace pmt
