#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace fharm;

namespace {

void expect_derivatives(const FProfile& f, double t)
{
    const double h = 1e-5 * std::max(1.0, t);
    EXPECT_NEAR(f.first(t), (f.value(t + h) - f.value(t - h)) / (2 * h), 1e-6 * (1 + std::abs(f.first(t)))) << f.label;
    EXPECT_NEAR(f.second(t), (f.first(t + h) - f.first(t - h)) / (2 * h), 1e-6 * (1 + std::abs(f.second(t))))
        << f.label;
    EXPECT_NEAR(f.value(t), f.F(t), 1e-12 * (1 + std::abs(f.F(t))));
    EXPECT_NEAR(f.first(t), f.dF(t), 1e-12 * (1 + std::abs(f.dF(t))));
    EXPECT_NEAR(f.second(t), f.ddF(t), 1e-12 * (1 + std::abs(f.ddF(t))));
}

} // namespace

TEST(Profiles, DerivativesMatchFiniteDifferences)
{
    for (const FProfile& f : {make_power(2), make_power(4), make_power(6.5), make_exp_type(0.5), make_exp_type(1.5),
                              make_sacks_uhlenbeck(0.5), make_sacks_uhlenbeck(0.9)})
        for (double t : {0.1, 0.5, 1.0, 1.5, 3.7})
            expect_derivatives(f, t);
}

TEST(Profiles, ParameterErrors)
{
    EXPECT_THROW(make_power(3), ConfigError);
    EXPECT_THROW(make_power(1), ConfigError);
    EXPECT_THROW(make_power(std::numeric_limits<double>::infinity()), ConfigError);
    EXPECT_THROW(make_exp_type(0.0), ConfigError);
    EXPECT_THROW(make_exp_type(-1.0), ConfigError);
    EXPECT_THROW(make_sacks_uhlenbeck(1.0), ConfigError);
    EXPECT_THROW(make_sacks_uhlenbeck(0.0), ConfigError);
    EXPECT_THROW(make_power(2).scaled(0.0), ConfigError);
}

TEST(Profiles, PowerTwoIsDirichlet)
{
    const FProfile f = make_power(2);
    EXPECT_EQ(f.value(1.25), 1.25);
    EXPECT_EQ(f.first(3.0), 1.0);
    EXPECT_EQ(f.second(3.0), 0.0);
}

TEST(Profiles, ScaledMultipliesEverything)
{
    for (const FProfile& f : {make_power(4), make_exp_type(1.0), make_sacks_uhlenbeck(0.5)}) {
        const FProfile g = f.scaled(2.5);
        EXPECT_NEAR(g.value(0.7), 2.5 * f.value(0.7), 1e-14);
        EXPECT_NEAR(g.first(0.7), 2.5 * f.first(0.7), 1e-14);
        EXPECT_NEAR(g.second(0.7), 2.5 * f.second(0.7), 1e-14);
        EXPECT_NEAR(g.F(0.7), 2.5 * f.F(0.7), 1e-14);
    }
}

TEST(Profiles, CustomProfileUsesCallbacks)
{
    const FProfile f = make_custom(
        "cubic", [](double t) { return t + t * t * t; }, [](double t) { return 1 + 3 * t * t; },
        [](double t) { return 6 * t; }, [](double u) { return u; });
    expect_derivatives(f, 0.8);
    EXPECT_EQ(f.comparison_factor(0.3, 1.0), 0.3);
}

TEST(AdmissibilityB, VanishesForPowerProfiles)
{
    for (double p : {2.0, 4.0, 6.0})
        for (double e : {0.2, 1.0, 1.5})
            for (double u : {0.1, 0.5, 2.0, 7.0})
                EXPECT_NEAR(admissibility_B(make_power(p), e, u, 0.8), 0.0, 1e-12);
}

TEST(AdmissibilityB, VanishesAtTimeZero)
{
    for (const FProfile& f : {make_exp_type(1.5), make_sacks_uhlenbeck(0.5)})
        EXPECT_EQ(admissibility_B(f, 1.2, 1.0, 0.6), 0.0);
}

TEST(AdmissibilityB, SacksUhlenbeckClosedForm)
{
    const double beta = 0.5;
    const FProfile f = make_sacks_uhlenbeck(beta);
    for (double e : {0.3, 1.0, 1.5})
        for (double u : {0.2, 0.8, 1.7, 4.0})
            for (double h : {-0.7, 0.4}) {
                const double closed = 2.0 * (beta - 1.0) * (u - 1.0) / ((1.0 + 2.0 * u * e) * (1.0 + 2.0 * e)) * h;
                EXPECT_NEAR(admissibility_B(f, e, u, h), closed, 1e-14);
            }
}

TEST(AdmissibilityB, ExpTypeAuxiliaryRelation)
{
    const double a = 1.5;
    const FProfile f = make_exp_type(a);
    for (double e : {0.5, 1.0, 1.5})
        for (double u : {0.3, 0.9, 2.0})
            EXPECT_NEAR(admissibility_B(f, e, u, 0.7), 0.7 * exp_type_auxiliary(u, e, a), 1e-14);
}

TEST(AdmissibilityB, ZeroDensityNodes)
{
    EXPECT_EQ(admissibility_B(make_power(4), 0.0, 0.5, 1.0), 0.0);
    EXPECT_THROW(admissibility_B(make_power(4), -1.0, 0.5, 1.0), ContractViolation);
}

TEST(ExpAuxiliary, DerivativeMatchesFiniteDifference)
{
    for (double e : {0.5, 1.0, 1.5})
        for (double u : {0.2, 0.6, 0.95}) {
            const double h = 1e-6;
            const double fd = (exp_type_auxiliary(u + h, e, 1.5) - exp_type_auxiliary(u - h, e, 1.5)) / (2 * h);
            EXPECT_NEAR(exp_type_auxiliary_derivative(u, e, 1.5), fd, 1e-8);
        }
}

TEST(ExpAuxiliary, NonIncreasingForSmallDensity)
{
    for (double e : {0.5, 1.0})
        for (double a : {e, 1.5}) {
            for (int k = 1; k <= 200; ++k) {
                const double u = k / 200.0;
                EXPECT_LE(exp_type_auxiliary_derivative(u, e, a), 1e-15) << "e=" << e << " a=" << a << " u=" << u;
            }
            EXPECT_NEAR(exp_type_auxiliary(1.0, e, a), 0.0, 1e-15);
        }
}

TEST(ExpAuxiliary, FailsToBeMonotoneAtDensityOneAndAHalf)
{
    // With a = e = 1.5 the auxiliary function dips below its value at u = 1.
    EXPECT_LT(exp_type_auxiliary(0.9, 1.5, 1.5), 0.0);
    EXPECT_GT(exp_type_auxiliary_derivative(0.95, 1.5, 1.5), 0.0);
}
