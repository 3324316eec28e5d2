#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace fharm;

namespace {

constexpr double kPi = std::numbers::pi;

} // namespace

TEST(GaussLegendre, TwoPointRuleIsKnown)
{
    std::vector<double> x;
    std::vector<double> w;
    gauss_legendre(2, x, w);
    EXPECT_NEAR(x[0], -1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(x[1], 1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(w[0], 1.0, 1e-15);
    EXPECT_NEAR(w[1], 1.0, 1e-15);
}

TEST(GaussLegendre, IntegratesPolynomialsUpToDegree2nMinus1)
{
    for (int n : {3, 8, 17, 64}) {
        std::vector<double> x;
        std::vector<double> w;
        gauss_legendre(n, x, w);
        for (int deg = 0; deg <= 2 * n - 1; deg += 1) {
            double q = 0.0;
            for (int i = 0; i < n; ++i)
                q += w[i] * std::pow(x[i], deg);
            const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
            EXPECT_NEAR(q, exact, 1e-13) << "n=" << n << " deg=" << deg;
        }
    }
}

TEST(Domain, VolumesMatchClosedForms)
{
    const auto s2 = oracle::sphere(2, 64);
    const auto s3 = oracle::sphere(3, 64);
    const auto t2 = oracle::torus(64);
    auto vol = [](const DomainManifold& d) { return integrate(d, std::vector<double>(d.node_count(), 1.0)); };
    EXPECT_NEAR(vol(*s2) / (4.0 * kPi) - 1.0, 0.0, 1e-8);
    EXPECT_NEAR(vol(*s3) / (2.0 * kPi * kPi) - 1.0, 0.0, 1e-8);
    EXPECT_NEAR(vol(*t2) / (4.0 * kPi * kPi) - 1.0, 0.0, 1e-8);
    EXPECT_NEAR(s2->analytic_volume(), 4.0 * kPi, 1e-14);
    EXPECT_NEAR(s3->analytic_volume(), 2.0 * kPi * kPi, 1e-13);
}

TEST(Domain, SecondMomentsOnSpheres)
{
    // int x_i^2 = Vol(S^m) / (m + 1) and odd moments vanish.
    for (int m : {2, 3}) {
        const auto d = oracle::sphere(m, 32);
        for (int i = 0; i <= m; ++i) {
            std::vector<double> sq(d->node_count());
            std::vector<double> odd(d->node_count());
            for (std::size_t k = 0; k < d->node_count(); ++k) {
                const Point y = d->chart_of(k).embedding(d->node(k).u);
                sq[k] = y(i) * y(i);
                odd[k] = y(i) * y(i) * y(i);
            }
            EXPECT_NEAR(integrate(*d, sq), d->analytic_volume() / (m + 1), 1e-10);
            EXPECT_NEAR(integrate(*d, odd), 0.0, 1e-10);
        }
    }
}

TEST(Domain, UnsupportedConfigurationsAreRejected)
{
    EXPECT_THROW(build_sphere_domain(4, 16), ConfigError);
    EXPECT_THROW(build_sphere_domain(1, 16), ConfigError);
    EXPECT_THROW(build_sphere_domain(2, 4), ConfigError);
    EXPECT_THROW(build_torus_domain(1, {2.0 * kPi}, 64), ConfigError);
    EXPECT_THROW(build_torus_domain(2, {1.0, -1.0}, 16), ConfigError);
    EXPECT_THROW(build_torus_domain(2, {1.0}, 16), ConfigError);
}

TEST(Domain, IntegrateRejectsWrongFieldLength)
{
    const auto d = oracle::sphere(2, 8);
    EXPECT_THROW(integrate(*d, std::vector<double>(d->node_count() + 1, 1.0)), ContractViolation);
}

TEST(Domain, NodesAreInteriorAndWeightsPositive)
{
    for (const auto& d : {oracle::sphere(2, 16), oracle::sphere(3, 16), oracle::torus(16)}) {
        for (std::size_t i = 0; i < d->node_count(); ++i) {
            const QuadratureNode& q = d->node(i);
            EXPECT_TRUE(d->chart_of(i).contains_interior(q.u));
            EXPECT_GT(q.measure, 0.0);
        }
    }
}

TEST(Chart, EmbeddingJacobianMatchesFiniteDifferences)
{
    std::mt19937_64 rng(7);
    for (int m : {2, 3}) {
        const auto d = oracle::sphere(m, 8);
        const Chart& c = d->charts[0];
        std::uniform_real_distribution<double> U(0.2, 2.9);
        for (int trial = 0; trial < 20; ++trial) {
            Coords u(m);
            for (int k = 0; k < m; ++k)
                u(k) = U(rng);
            EXPECT_NEAR(c.embedding(u).norm(), 1.0, 1e-14);
            const Jacobian J = c.embedding_jacobian(u);
            for (int k = 0; k < m; ++k) {
                Coords a = u;
                Coords b = u;
                a(k) += 1e-6;
                b(k) -= 1e-6;
                const Point fd = (c.embedding(a) - c.embedding(b)) / 2e-6;
                EXPECT_LT((fd - J.col(k)).norm(), 1e-8);
            }
            // metric = J^T J for the round sphere
            EXPECT_LT((c.metric(u) - J.transpose() * J).cwiseAbs().maxCoeff(), 1e-13);
            EXPECT_NEAR(c.volume_density(u), std::sqrt(c.metric(u).determinant()), 1e-13);
        }
    }
}

TEST(Chart, OrthonormalFrameIsOrthonormal)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.1, 3.0);
    const auto d = oracle::sphere(3, 8);
    const Chart& c = d->charts[0];
    for (int trial = 0; trial < 50; ++trial) {
        Coords u(3);
        u << U(rng), U(rng), U(rng);
        const SquareMatrix E = orthonormal_frame(c, u);
        EXPECT_LT((E.transpose() * c.metric(u) * E - SquareMatrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Chart, NonSpdMetricIsReported)
{
    Chart c = oracle::sphere(2, 8)->charts[0];
    c.metric = [](const Coords&) {
        SquareMatrix g(2, 2);
        g << 1.0, 0.0, 0.0, -1.0;
        return g;
    };
    Coords u(2);
    u << 1.0, 1.0;
    EXPECT_THROW(orthonormal_frame(c, u), NumericError);
}

TEST(Reduction, PairwiseSumIsExactOnIntegers)
{
    std::vector<double> v(10007);
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = static_cast<double>(i % 97);
    double exact = 0.0;
    for (double x : v)
        exact += x;
    EXPECT_EQ(pairwise_sum(v), exact);
    EXPECT_EQ(pairwise_sum(std::span<const double>()), 0.0);
}

TEST(Reduction, FusedIntegralMatchesIntegrate)
{
    const auto d = oracle::sphere(2, 32);
    std::vector<double> f(d->node_count());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = 1.0 + d->chart_of(i).embedding(d->node(i).u)(2);
    const auto red = integrate_fused<1, 1>(*d, [&](std::size_t i, std::array<double, 1>& v, std::array<double, 1>& m) {
        v[0] = f[i];
        m[0] = f[i];
    });
    EXPECT_NEAR(red.integrals[0], integrate(*d, f), 1e-12);
    EXPECT_EQ(red.minima[0], *std::min_element(f.begin(), f.end()));
}

TEST(Reduction, ResultsDoNotDependOnThreadCount)
{
    const auto d = oracle::sphere(3, 24);
    auto run = [&] {
        return integrate_fused<1, 0>(*d, [&](std::size_t i, std::array<double, 1>& v, std::array<double, 0>&) {
                   v[0] = std::sin(static_cast<double>(i));
               })
            .integrals[0];
    };
    const char* old = std::getenv("FHARM_THREADS");
    const std::string saved = old ? old : "";
    setenv("FHARM_THREADS", "1", 1);
    const double one = run();
    setenv("FHARM_THREADS", "5", 1);
    const double five = run();
    if (old)
        setenv("FHARM_THREADS", saved.c_str(), 1);
    else
        unsetenv("FHARM_THREADS");
    EXPECT_EQ(one, five);
}

TEST(Parallel, ExceptionsPropagate)
{
    const char* old = std::getenv("FHARM_THREADS");
    const std::string saved = old ? old : "";
    setenv("FHARM_THREADS", "3", 1);
    EXPECT_THROW(parallel_for(
                     100000,
                     [](std::size_t i) {
                         if (i == 77777)
                             throw NumericError("boom");
                     }),
                 NumericError);
    if (old)
        setenv("FHARM_THREADS", saved.c_str(), 1);
    else
        unsetenv("FHARM_THREADS");
}
