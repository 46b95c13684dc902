#include <gtest/gtest.h>

#include "oqk/ainfty.hpp"
#include "oqk/polygon.hpp"
#include "support.hpp"

using namespace oqk;
using oqk::testing::q;

namespace {

const Rational C(10);

long binomial(int n, int k)
{
    long c = 1;
    for (int i = 0; i < k; ++i)
        c = c * (n - i) / (i + 1);
    return c;
}

}

TEST(Polygon, ReportOfSmallestCase)
{
    auto r = polygon_report(2);
    EXPECT_EQ(r.betti, (std::vector<long>{1, 2, 1}));
    EXPECT_EQ(r.betti_sum, 4);
    EXPECT_EQ(r.expected_rank, 4);
    EXPECT_EQ(r.reduced_lagrangian_real_dim, 4);
    EXPECT_GE(r.min_maslov, 2);
    EXPECT_GE(r.unstable_real_codim, 2);
}

TEST(Polygon, BettiNumbersAreBinomial)
{
    for (int l = 1; l <= 8; ++l) {
        auto r = polygon_report(l);
        ASSERT_EQ(static_cast<int>(r.betti.size()), l + 1);
        for (int k = 0; k <= l; ++k)
            EXPECT_EQ(r.betti[static_cast<std::size_t>(k)], binomial(l, k));
        EXPECT_EQ(r.betti_sum, 1L << l);
    }
    EXPECT_THROW(polygon_report(0), ParseError);
}

TEST(Polygon, FixtureDegreesAreEven)
{
    auto fx = polygon_fixture(2, C);
    const auto& B = fx.structure.basis();
    for (int i = 0; i < B.size(); ++i)
        if (i != B.unit() && i != B.weighted()) {
            EXPECT_EQ(B.degree(i) % 2, 0) << B.name(i);
        }
}

TEST(Polygon, FloerRankMatchesBettiSum)
{
    for (int l = 1; l <= 3; ++l) {
        auto fx = polygon_fixture(l, C);
        EXPECT_EQ(fx.expected_rank, 1L << l);
        EXPECT_EQ(cohomology_rank(fx.structure, fx.cochain), polygon_report(l).betti_sum) << l;
    }
}

TEST(Polygon, CurvedFixtureIsWeaklyBounding)
{
    for (int l = 1; l <= 3; ++l) {
        Scalar w = q(Rational(1, 2), C, 3);
        auto fx = polygon_fixture(l, C, w);
        EXPECT_TRUE(is_weakly_bounding(fx.structure, fx.cochain));
        EXPECT_EQ(potential(fx.structure, fx.cochain), w);
        EXPECT_EQ(cohomology_rank(fx.structure, fx.cochain), 1L << l) << l;
    }
}

TEST(Polygon, FixtureIsAInfinity)
{
    EXPECT_TRUE(verify_ainfty(polygon_fixture(2, C).structure, 4).ok());
}
