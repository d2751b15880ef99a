#include <gtest/gtest.h>

#include "pmt/spaces.hpp"
#include "test_util.hpp"

namespace pmt {
namespace {

using testing::abs_space;
using testing::e2_space;
using testing::make_space;

TEST(Point, RejectsNonFiniteCoordinates) {
    EXPECT_THROW(Point(std::nan("")), InvalidInput);
    EXPECT_THROW(Point({0.0, INFINITY}), InvalidInput);
}

TEST(Point, OrderingIsLexicographic) {
    EXPECT_LT(Point({0.0, 1.0}), Point({0.5, 0.0}));
    EXPECT_EQ(Point(0.25), Point(0.25));
    EXPECT_THROW((void)Point({1.0, 2.0}).scalar(), InvalidInput);
}

TEST(Box, OpenAndClosedEnds) {
    const auto open = Box::open(0.0, 1.0);
    EXPECT_FALSE(open.contains(Point(0.0)));
    EXPECT_TRUE(open.contains(Point(0.5)));
    EXPECT_TRUE(Box::closed(0.0, 1.0).contains(Point(1.0)));
    EXPECT_TRUE(Box::closed(0.0, 1.0).contains(open));
    EXPECT_FALSE(open.contains(Box::closed(0.0, 1.0)));
}

TEST(SpaceDescriptor, ValidatesParameters) {
    EXPECT_THROW(make_space(oracle::abs_diff(), 0.5), InvalidInput);
    EXPECT_THROW(make_space(oracle::abs_diff(), 1.0, 0), InvalidInput);
    EXPECT_THROW(make_space(oracle::abs_diff(), 2.0, 1, Box::closed(0, 1), SpaceClass::Metric),
                 InvalidInput);
    EXPECT_THROW(make_space(oracle::abs_diff(), 1.0, 2, Box::closed(0, 1),
                            SpaceClass::PartialBMetric),
                 InvalidInput);
    EXPECT_THROW(make_space(oracle::abs_diff(), 1.0, 1, Box::open(0.5, 0.5)), InvalidInput);
    EXPECT_NO_THROW(make_space(oracle::abs_diff(), 1.0, 2, Box::closed(0, 1),
                               SpaceClass::PartialRectangular));
}

TEST(Distance, WorkedValues) {
    const auto e1 = make_space(testing::e1_oracle(), 4.0, 1, Box::closed(0.0, 10.0));
    EXPECT_EQ(eval_distance(e1, 1.0, 2.0), 5.0);
    EXPECT_EQ(eval_distance(e1, 0.0, 0.0), 0.0);
    EXPECT_EQ(self_distance(e1, 3.0), 9.0);
    const auto e2 = e2_space();
    EXPECT_DOUBLE_EQ(eval_distance(e2, 0.25, 0.75), 2.25);
    EXPECT_EQ(self_distance(e2, 0.5), 2.0);
    EXPECT_EQ(self_distance(abs_space(), 0.3), 0.0);
}

TEST(Distance, RejectsPointsOutsideDomain) {
    EXPECT_THROW((void)eval_distance(e2_space(), 0.0, 0.5), InvalidInput);
    EXPECT_THROW((void)eval_distance(abs_space(), 1.5, 0.5), InvalidInput);
}

TEST(Distance, RejectsNegativeOrNonFiniteOracleValues) {
    const auto neg = make_space(oracle::constant(-1.0));
    EXPECT_THROW((void)eval_distance(neg, 0.1, 0.2), InvalidInput);
    const auto inf = make_space(oracle::custom([](const Point&, const Point&) { return INFINITY; }, "inf"));
    EXPECT_THROW((void)eval_distance(inf, 0.1, 0.2), InvalidInput);
}

TEST(Distance, EvaluationOrderIsNormalized) {
    const auto asym = make_space(oracle::pos_diff());
    EXPECT_EQ(eval_distance(asym, 0.9, 0.1), eval_distance(asym, 0.1, 0.9));
    EXPECT_NE(raw_distance(asym, 0.9, 0.1), raw_distance(asym, 0.1, 0.9));
}

TEST(Ball, WorkedValues) {
    const auto e2 = e2_space();
    EXPECT_TRUE(ball_contains(e2, 0.5, 0.1, 0.75));
    EXPECT_FALSE(ball_contains(e2, 0.1, 0.01, 0.9));
    EXPECT_TRUE(ball_contains(e2, 0.3, 1e-12, 0.3));
    EXPECT_THROW((void)ball_contains(e2, 0.5, 0.0, 0.5), InvalidInput);
}

TEST(MapFamily, IndicesStartAtOne) {
    MapFamily f{[](std::size_t) { return testing::scale_map(0.5); }, "half"};
    EXPECT_THROW((void)f(0), InvalidInput);
    EXPECT_EQ(f(3)(Point(1.0)).scalar(), 0.5);
}

TEST(Sampler, SameSeedSameTuples) {
    const auto a = Sampler::with_budget(11, Box::closed(0, 1), 400).tuples(3);
    const auto b = Sampler::with_budget(11, Box::closed(0, 1), 400).tuples(3);
    const auto c = Sampler::with_budget(12, Box::closed(0, 1), 400).tuples(3);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(Sampler, BudgetSplitsBetweenGridAndRandom) {
    const auto s = Sampler::with_budget(0, Box::closed(0, 1), 10000);
    EXPECT_EQ(s.random_count, 5000u);
    const auto t = s.tuples(3);
    EXPECT_GE(t.size(), 10000u);
    for (const auto& tup : t) {
        ASSERT_EQ(tup.size(), 3u);
        for (const auto& x : tup) EXPECT_TRUE(Box::closed(0, 1).contains(x));
    }
}

TEST(Sampler, OpenEndsArePulledIn) {
    Sampler s = Sampler::with_budget(5, Box::open(0, 1), 2000);
    for (const auto& x : s.points()) {
        EXPECT_GT(x.scalar(), 0.0);
        EXPECT_LT(x.scalar(), 1.0);
    }
}

TEST(Grid, CoversBoxWithRequestedDensity) {
    const auto g = grid_points(Box{{Interval{0, 1}, Interval{0, 2}}}, 5);
    EXPECT_EQ(g.size(), 25u);
    EXPECT_EQ(g.front(), Point({0.0, 0.0}));
    EXPECT_EQ(g.back(), Point({1.0, 2.0}));
}

TEST(SelfMap, EscapesAreReported) {
    const auto s = abs_space();
    const auto sampler = domain_sampler(s, 1, 200);
    EXPECT_TRUE(self_map_escapes(s, testing::scale_map(0.5), sampler).empty());
    const auto esc = self_map_escapes(s, testing::scale_map(2.0), sampler);
    ASSERT_FALSE(esc.empty());
    for (const auto& x : esc) EXPECT_GT(x.scalar(), 0.5);
}

}  // namespace
}  // namespace pmt
