#pragma once

#include "fharm/core.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace fharm {

/// A coordinate patch with its metric. Sphere charts also carry the standard
/// embedding into R^{m+1} so catalog maps can be written in ambient terms.
struct Chart {
    Coords lower;
    Coords upper;
    std::function<SquareMatrix(const Coords&)> metric;
    std::function<double(const Coords&)> volume_density;
    std::function<Point(const Coords&)> embedding;
    std::function<Jacobian(const Coords&)> embedding_jacobian;
    std::vector<bool> periodic;

    int dim() const { return static_cast<int>(lower.size()); }

    /// Largest side of the parameter box measured in units of 2*pi.
    double scale() const { return (upper - lower).maxCoeff() / (2.0 * std::numbers::pi); }

    bool contains_interior(const Coords& u) const
    {
        return ((u - lower).array() > 0.0).all() && ((upper - u).array() > 0.0).all();
    }

    /// True when u +- h stays inside the box along every non-periodic axis.
    bool stencil_fits(const Coords& u, double h) const
    {
        for (int k = 0; k < dim(); ++k) {
            if (periodic[k])
                continue;
            if (u(k) - h <= lower(k) || u(k) + h >= upper(k))
                return false;
        }
        return true;
    }
};

struct QuadratureNode {
    std::size_t chart = 0;
    Coords u;
    double weight = 0.0;  ///< coordinate weight
    double measure = 0.0; ///< weight * sqrt(det g(u))
};

struct QuadratureRule {
    std::vector<QuadratureNode> nodes;
    int resolution = 0;
    /// Relative error of the rule on the constant 1, measured at build time.
    double volume_error = 0.0;

    std::size_t size() const { return nodes.size(); }
};

enum class DomainKind { Sphere, FlatTorus };

struct DomainManifold {
    DomainKind kind = DomainKind::Sphere;
    int dim = 0;
    std::vector<double> periods; ///< flat torus only
    std::vector<Chart> charts;
    QuadratureRule quadrature;

    std::size_t node_count() const { return quadrature.size(); }
    const QuadratureNode& node(std::size_t i) const { return quadrature.nodes[i]; }
    const Chart& chart_of(std::size_t i) const { return charts[quadrature.nodes[i].chart]; }

    /// Closed-form Riemannian volume.
    double analytic_volume() const
    {
        if (kind == DomainKind::FlatTorus) {
            double v = 1.0;
            for (double p : periods)
                v *= p;
            return v;
        }
        // Vol(S^m) = 2 pi^{(m+1)/2} / Gamma((m+1)/2)
        const double h = 0.5 * (dim + 1);
        return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
    }

    std::string describe() const
    {
        std::ostringstream os;
        if (kind == DomainKind::Sphere)
            os << "S^" << dim;
        else
            os << "T^" << dim;
        os << " (" << node_count() << " nodes)";
        return os.str();
    }
};

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w)
{
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16)
                break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
}

namespace detail {

// Hyperspherical coordinates: psi_1..psi_{m-1} in (0, pi), psi_m in (0, 2 pi).
//   x_i     = sin psi_1 ... sin psi_{i-1} cos psi_i   (i <= m)
//   x_{m+1} = sin psi_1 ... sin psi_{m-1} sin psi_m
inline Point hypersphere_point(const Coords& psi)
{
    const int m = static_cast<int>(psi.size());
    Point x(m + 1);
    double prod = 1.0;
    for (int i = 0; i < m; ++i) {
        x(i) = prod * std::cos(psi(i));
        prod *= std::sin(psi(i));
    }
    x(m) = prod;
    return x;
}

inline Jacobian hypersphere_jacobian(const Coords& psi)
{
    const int m = static_cast<int>(psi.size());
    Jacobian J = Jacobian::Zero(m + 1, m);
    for (int i = 0; i <= m; ++i) {
        // x_i carries sine factors psi_0..psi_{i-1}, then cos psi_i (or nothing for the last one).
        const int nsin = i;
        for (int j = 0; j < std::min(i + 1, m); ++j) {
            double value = 1.0;
            for (int l = 0; l < nsin; ++l)
                value *= (l == j) ? std::cos(psi(l)) : std::sin(psi(l));
            if (i < m)
                value *= (j == i) ? -std::sin(psi(i)) : std::cos(psi(i));
            J(i, j) = value;
        }
    }
    return J;
}

inline SquareMatrix hypersphere_metric(const Coords& psi)
{
    const int m = static_cast<int>(psi.size());
    SquareMatrix g = SquareMatrix::Zero(m, m);
    double prod = 1.0;
    for (int i = 0; i < m; ++i) {
        g(i, i) = prod;
        const double s = std::sin(psi(i));
        prod *= s * s;
    }
    return g;
}

inline double hypersphere_density(const Coords& psi)
{
    const int m = static_cast<int>(psi.size());
    double d = 1.0;
    for (int k = 0; k < m - 1; ++k)
        d *= std::pow(std::sin(psi(k)), m - 1 - k);
    return d;
}

inline void finish_rule(DomainManifold& domain)
{
    std::vector<double> ones(domain.node_count());
    for (std::size_t i = 0; i < ones.size(); ++i)
        ones[i] = domain.quadrature.nodes[i].measure;
    const double vol = domain.analytic_volume();
    domain.quadrature.volume_error = std::abs(pairwise_sum(ones) - vol) / vol;
    if (!(domain.quadrature.volume_error < 1e-6))
        throw NumericError("quadrature rule for " + domain.describe() + " misses the volume by "
                           + std::to_string(domain.quadrature.volume_error));
}

} // namespace detail

/// Round S^m (m in {2,3}) with Gauss-Legendre nodes in the polar angles and
/// 2*resolution uniform nodes in the periodic angle. No node sits on a pole.
inline DomainManifold build_sphere_domain(int m, int resolution)
{
    if (m != 2 && m != 3)
        throw ConfigError("sphere domain: unsupported dimension " + std::to_string(m) + " (expected 2 or 3)");
    if (resolution < 8)
        throw ConfigError("sphere domain: resolution must be >= 8, got " + std::to_string(resolution));

    DomainManifold domain;
    domain.kind = DomainKind::Sphere;
    domain.dim = m;

    Chart chart;
    chart.lower = Coords::Zero(m);
    chart.upper = Coords::Constant(m, std::numbers::pi);
    chart.upper(m - 1) = 2.0 * std::numbers::pi;
    chart.metric = detail::hypersphere_metric;
    chart.volume_density = detail::hypersphere_density;
    chart.embedding = detail::hypersphere_point;
    chart.embedding_jacobian = detail::hypersphere_jacobian;
    chart.periodic.assign(m, false);
    chart.periodic[m - 1] = true;
    domain.charts.push_back(std::move(chart));

    std::vector<double> gx;
    std::vector<double> gw;
    gauss_legendre(resolution, gx, gw);
    const int nper = 2 * resolution;
    const double hper = 2.0 * std::numbers::pi / nper;

    std::size_t total = static_cast<std::size_t>(nper);
    for (int k = 0; k < m - 1; ++k)
        total *= static_cast<std::size_t>(resolution);
    domain.quadrature.resolution = resolution;
    domain.quadrature.nodes.reserve(total);

    std::vector<int> idx(m, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int k = m - 1; k >= 0; --k) {
            const std::size_t base = (k == m - 1) ? nper : resolution;
            idx[k] = static_cast<int>(rem % base);
            rem /= base;
        }
        QuadratureNode node;
        node.chart = 0;
        node.u.resize(m);
        node.weight = hper;
        for (int k = 0; k < m - 1; ++k) {
            node.u(k) = 0.5 * std::numbers::pi * (gx[idx[k]] + 1.0);
            node.weight *= 0.5 * std::numbers::pi * gw[idx[k]];
        }
        node.u(m - 1) = (idx[m - 1] + 0.5) * hper;
        node.measure = node.weight * detail::hypersphere_density(node.u);
        domain.quadrature.nodes.push_back(std::move(node));
    }
    detail::finish_rule(domain);
    return domain;
}

/// Flat torus R^m / prod(periods Z) with a uniform cell-centred product grid.
inline DomainManifold build_torus_domain(int m, const std::vector<double>& periods, int resolution)
{
    if (m < 2)
        throw ConfigError("torus domain: dimension must be >= 2, got " + std::to_string(m));
    if (m > kMaxDomainDim)
        throw ConfigError("torus domain: dimension above " + std::to_string(kMaxDomainDim));
    if (static_cast<int>(periods.size()) != m)
        throw ConfigError("torus domain: expected " + std::to_string(m) + " periods");
    for (double p : periods)
        if (!(p > 0.0))
            throw ConfigError("torus domain: periods must be positive");
    if (resolution < 2)
        throw ConfigError("torus domain: resolution must be >= 2");

    DomainManifold domain;
    domain.kind = DomainKind::FlatTorus;
    domain.dim = m;
    domain.periods = periods;

    Chart chart;
    chart.lower = Coords::Zero(m);
    chart.upper.resize(m);
    for (int k = 0; k < m; ++k)
        chart.upper(k) = periods[k];
    chart.metric = [m](const Coords&) { return SquareMatrix::Identity(m, m); };
    chart.volume_density = [](const Coords&) { return 1.0; };
    chart.periodic.assign(m, true);
    domain.charts.push_back(std::move(chart));

    double w = 1.0;
    for (double p : periods)
        w *= p / resolution;
    std::size_t total = 1;
    for (int k = 0; k < m; ++k)
        total *= static_cast<std::size_t>(resolution);
    domain.quadrature.resolution = resolution;
    domain.quadrature.nodes.reserve(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        QuadratureNode node;
        node.u.resize(m);
        for (int k = m - 1; k >= 0; --k) {
            node.u(k) = (static_cast<double>(rem % resolution) + 0.5) * periods[k] / resolution;
            rem /= resolution;
        }
        node.weight = w;
        node.measure = w;
        domain.quadrature.nodes.push_back(std::move(node));
    }
    detail::finish_rule(domain);
    return domain;
}

/// Sum over nodes of weight * sqrt(det g) * field, reduced pairwise.
inline double integrate(const DomainManifold& domain, std::span<const double> field)
{
    if (field.size() != domain.node_count())
        throw ContractViolation("integrate: field has " + std::to_string(field.size()) + " values, domain has "
                                + std::to_string(domain.node_count()) + " nodes");
    std::vector<double> terms(field.size());
    for (std::size_t i = 0; i < terms.size(); ++i)
        terms[i] = domain.quadrature.nodes[i].measure * field[i];
    return pairwise_sum(terms);
}

template <std::size_t K, std::size_t M>
struct FusedReduction {
    std::array<double, K> integrals{};
    std::array<double, M> minima{};
};

/// Integrates K node fields and takes the minimum of M others in one pass,
/// without materialising per-node arrays. kernel(i, values, mins) fills the
/// K integrands and M candidates at node i. Nodes are reduced pairwise inside
/// fixed blocks, then block sums pairwise, so the result does not depend on
/// the thread count.
template <std::size_t K, std::size_t M, typename Kernel>
FusedReduction<K, M> integrate_fused(const DomainManifold& domain, Kernel&& kernel)
{
    constexpr std::size_t kBlock = 512;
    const std::size_t n = domain.node_count();
    const std::size_t blocks = (n + kBlock - 1) / kBlock;
    std::vector<std::array<double, K>> block_sums(blocks);
    std::vector<std::array<double, M>> block_mins(blocks);
    parallel_for(
        blocks,
        [&](std::size_t b) {
            const std::size_t lo = b * kBlock;
            const std::size_t len = std::min(kBlock, n - lo);
            std::array<std::array<double, kBlock>, K> buf;
            std::array<double, M> mins;
            mins.fill(std::numeric_limits<double>::infinity());
            std::array<double, K> vals;
            std::array<double, M> cand;
            for (std::size_t j = 0; j < len; ++j) {
                const std::size_t i = lo + j;
                kernel(i, vals, cand);
                const double w = domain.quadrature.nodes[i].measure;
                for (std::size_t k = 0; k < K; ++k)
                    buf[k][j] = w * vals[k];
                for (std::size_t k = 0; k < M; ++k)
                    mins[k] = std::min(mins[k], cand[k]);
            }
            for (std::size_t k = 0; k < K; ++k)
                block_sums[b][k] = pairwise_sum(std::span<const double>(buf[k].data(), len));
            block_mins[b] = mins;
        },
        8);
    FusedReduction<K, M> out;
    std::vector<double> column(blocks);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t b = 0; b < blocks; ++b)
            column[b] = block_sums[b][k];
        out.integrals[k] = pairwise_sum(column);
    }
    for (std::size_t k = 0; k < M; ++k) {
        out.minima[k] = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < blocks; ++b)
            out.minima[k] = std::min(out.minima[k], block_mins[b][k]);
    }
    return out;
}

/// Columns of E form a g-orthonormal frame: E^T g E = I, with E = L^{-T}
/// for the Cholesky factor g = L L^T.
inline SquareMatrix orthonormal_frame(const Chart& chart, const Coords& u)
{
    const SquareMatrix g = chart.metric(u);
    Eigen::LLT<SquareMatrix> llt(g);
    if (llt.info() != Eigen::Success) {
        std::ostringstream os;
        os << "orthonormal_frame: metric is not positive definite at u = (" << u.transpose() << ")";
        throw NumericError(os.str());
    }
    const int m = static_cast<int>(g.rows());
    SquareMatrix E = SquareMatrix::Identity(m, m);
    llt.matrixU().solveInPlace(E);
    return E;
}

} // namespace fharm
