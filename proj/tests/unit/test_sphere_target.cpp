#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fharm;

namespace {

Point random_unit(int dim, std::mt19937_64& rng)
{
    std::normal_distribution<double> N;
    Point p(dim);
    for (int k = 0; k < dim; ++k)
        p(k) = N(rng);
    return p / p.norm();
}

} // namespace

TEST(ConformalFlow, ZeroDirectionIsRejected)
{
    EXPECT_THROW(ConformalFlow(Point::Zero(4), 1.0), ConfigError);
}

TEST(ConformalFlow, FixesTheAxisPoints)
{
    const Point u = basis_vector(5, 4);
    const ConformalFlow f(u, 1.3);
    EXPECT_LT((flow_apply(f, u) - u).norm(), 1e-15);
    EXPECT_LT((flow_apply(f, Point(-u)) + u).norm(), 1e-15);
    EXPECT_DOUBLE_EQ(conformal_factor(f, u), std::exp(-1.3));
    EXPECT_DOUBLE_EQ(conformal_factor(f, Point(-u)), std::exp(1.3));
}

TEST(ConformalFlow, IdentityAtTimeZero)
{
    std::mt19937_64 rng(3);
    const ConformalFlow f(random_unit(4, rng), 0.0);
    const Point y = random_unit(4, rng);
    EXPECT_LT((flow_apply(f, y) - y).norm(), 1e-15);
    EXPECT_DOUBLE_EQ(conformal_factor(f, y), 1.0);
}

TEST(ConformalFlow, ClosedFormMatchesOdeOracle)
{
    std::mt19937_64 rng(20240607);
    std::uniform_real_distribution<double> T(-2.0, 2.0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const int dim = 3 + k % 3;
        const ConformalFlow f(random_unit(dim, rng), T(rng));
        const Point y = random_unit(dim, rng);
        worst = std::max(worst, (flow_apply(f, y) - flow_ode_oracle(f, y, 4000)).norm());
    }
    EXPECT_LT(worst, 1e-8);
}

TEST(ConformalFlow, OracleRejectsTooFewSteps)
{
    EXPECT_THROW(flow_ode_oracle(ConformalFlow(basis_vector(3, 0), 1.0), basis_vector(3, 1), 10), ContractViolation);
}

TEST(ConformalFlow, NonUnitDirectionScalesTime)
{
    std::mt19937_64 rng(5);
    const Point u = random_unit(4, rng);
    const Point y = random_unit(4, rng);
    const ConformalFlow slow(Point(2.5 * u), 0.4);
    const ConformalFlow unit(u, 1.0);
    EXPECT_LT((flow_apply(slow, y) - flow_apply(unit, y)).norm(), 1e-14);
    EXPECT_NEAR(conformal_factor(slow, y), conformal_factor(unit, y), 1e-14);
}

TEST(ConformalFlow, GroupLawAndInverse)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> T(-2.0, 2.0);
    for (int k = 0; k < 100; ++k) {
        const Point u = random_unit(5, rng);
        const Point y = random_unit(5, rng);
        const double s = T(rng);
        const double t = T(rng);
        const ConformalFlow fs(u, s);
        const ConformalFlow ft(u, t);
        const ConformalFlow fst(u, s + t);
        EXPECT_LT((flow_apply(fs, flow_apply(ft, y)) - flow_apply(fst, y)).norm(), 1e-10);
        // gamma_{-t}^u = gamma_t^{-u}
        EXPECT_LT((flow_apply(ft.at(-t), y) - flow_apply(ft.reversed(), y)).norm(), 1e-12);
        EXPECT_LT((flow_apply(ft.reversed(), flow_apply(ft, y)) - y).norm(), 1e-10);
    }
}

TEST(ConformalFlow, ConformalFactorCocycle)
{
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> T(-2.0, 2.0);
    for (int k = 0; k < 100; ++k) {
        const Point u = random_unit(4, rng);
        const Point y = random_unit(4, rng);
        const double s = T(rng);
        const double t = T(rng);
        const double lhs = conformal_factor(ConformalFlow(u, s + t), y);
        const double rhs = conformal_factor(ConformalFlow(u, s), flow_apply(ConformalFlow(u, t), y))
                           * conformal_factor(ConformalFlow(u, t), y);
        EXPECT_NEAR(lhs / rhs, 1.0, 1e-10);
    }
}

TEST(ConformalFlow, DifferentialScalesByConformalFactor)
{
    // |d gamma(w)| = alpha |w| for tangent w, by finite differences along great circles.
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> T(-2.0, 2.0);
    for (int k = 0; k < 50; ++k) {
        const Point u = random_unit(4, rng);
        const Point y = random_unit(4, rng);
        Point w = random_unit(4, rng);
        w -= w.dot(y) * y;
        w /= w.norm();
        const ConformalFlow f(u, T(rng));
        const double h = 1e-6;
        const Point a = std::cos(h) * y + std::sin(h) * w;
        const Point b = std::cos(h) * y - std::sin(h) * w;
        const double stretch = (flow_apply(f, a) - flow_apply(f, b)).norm() / (2.0 * h);
        EXPECT_NEAR(stretch / conformal_factor(f, y), 1.0, 1e-7);
    }
}

TEST(ConformalFlow, VelocityIsVbar)
{
    std::mt19937_64 rng(29);
    const Point u = random_unit(4, rng);
    const Point y = random_unit(4, rng);
    const double h = 1e-6;
    const Point vel = (flow_apply(ConformalFlow(u, h), y) - flow_apply(ConformalFlow(u, -h), y)) / (2.0 * h);
    EXPECT_LT((vel - vbar(u, y)).norm(), 1e-9);
}

TEST(ConformalDiffeo, RejectsNonOrthogonalMatrix)
{
    AmbientMatrix r = AmbientMatrix::Identity(3, 3);
    r(0, 1) = 0.1;
    EXPECT_THROW(ConformalDiffeo(r, ConformalFlow(basis_vector(3, 2), 1.0)), ConfigError);
    EXPECT_THROW(ConformalDiffeo(AmbientMatrix::Identity(4, 4), ConformalFlow(basis_vector(3, 2), 1.0)), ConfigError);
}

TEST(ConformalDiffeo, RotationKeepsFactorAndNorm)
{
    std::mt19937_64 rng(31);
    const ConformalDiffeo d(plane_rotation(4, 0, 2, 0.7), ConformalFlow(random_unit(4, rng), 0.9));
    for (int k = 0; k < 20; ++k) {
        const Point y = random_unit(4, rng);
        const Point z = compose_diffeo(d, y);
        EXPECT_NEAR(z.norm(), 1.0, 1e-15);
        EXPECT_DOUBLE_EQ(conformal_factor(d, y), conformal_factor(d.flow(), y));
        EXPECT_LT((d.rotation().transpose() * z - flow_apply(d.flow(), y)).norm(), 1e-14);
    }
}

TEST(Directions, SeededAndUnit)
{
    const auto a = random_unit_directions(5, 8, 20240607);
    const auto b = random_unit_directions(5, 8, 20240607);
    const auto c = random_unit_directions(5, 8, 1);
    ASSERT_EQ(a.size(), 8u);
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_NEAR(a[k].norm(), 1.0, 1e-15);
        EXPECT_EQ(a[k], b[k]);
    }
    EXPECT_NE(a[0], c[0]);
}
