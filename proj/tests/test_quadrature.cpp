#include <gtest/gtest.h>

#include <cmath>
#include <thread>
#include <vector>

#include "vssea/quadrature.hpp"

using vssea::quadrature::gauss_legendre;
using vssea::quadrature::simpson;

TEST(GaussLegendre, WeightsSumToOne)
{
    for (int n : {1, 2, 5, 16, 64}) {
        const auto& r = gauss_legendre(n);
        double s = 0.0;
        for (double w : r.weights) s += w;
        EXPECT_NEAR(s, 1.0, 1e-14) << n;
    }
}

TEST(GaussLegendre, ExactForDegree2nMinus1)
{
    for (int n : {3, 8, 20}) {
        const auto& r = gauss_legendre(n);
        const int deg = 2 * n - 1;
        double s = 0.0;
        for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], deg);
        EXPECT_NEAR(s, 1.0 / (deg + 1), 1e-14) << n;
    }
}

TEST(GaussLegendre, NodesSortedInsideUnitInterval)
{
    const auto& r = gauss_legendre(33);
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        EXPECT_GT(r.nodes[i], 0.0);
        EXPECT_LT(r.nodes[i], 1.0);
        if (i) {
            EXPECT_GT(r.nodes[i], r.nodes[i - 1]);
        }
    }
}

TEST(GaussLegendre, RejectsEmptyRule) { EXPECT_THROW(gauss_legendre(0), vssea::PreconditionViolation); }

TEST(GaussLegendre, ConcurrentLookupsAgree)
{
    std::vector<std::thread> pool;
    std::vector<double> first(8);
    for (int i = 0; i < 8; ++i) {
        pool.emplace_back([&, i] { first[i] = gauss_legendre(40 + i % 3).nodes[0]; });
    }
    for (auto& t : pool) t.join();
    for (int i = 0; i < 8; ++i) EXPECT_EQ(first[i], gauss_legendre(40 + i % 3).nodes[0]);
}

TEST(Simpson, ExactForCubics)
{
    const double v = simpson([](double x) { return 2 * x * x * x - x + 1; }, -1.0, 2.0, 4);
    EXPECT_NEAR(v, 9.0, 1e-12);
}

TEST(Simpson, OddPanelCountRoundsUp)
{
    EXPECT_DOUBLE_EQ(simpson([](double x) { return std::sin(x); }, 0.0, 1.0, 7),
                     simpson([](double x) { return std::sin(x); }, 0.0, 1.0, 8));
}
