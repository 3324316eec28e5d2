#pragma once

#include "fharm/profile.hpp"
#include "fharm/smooth_map.hpp"

#include <cmath>
#include <sstream>

namespace fharm {

/// E_F from precomputed fields.
inline double f_energy(const DomainManifold& domain, const MapFields& fields, const FProfile& profile)
{
    std::vector<double> integrand(fields.count);
    parallel_for(fields.count, [&](std::size_t i) { integrand[i] = profile.value(fields.density[i]); });
    return integrate(domain, integrand);
}

/// E_F(phi) = int_M F(|d phi|^2 / 2) dv_g.
inline double f_energy(const SmoothMap& map, const FProfile& profile)
{
    return f_energy(map.domain(), compute_fields(map, FieldOptions{false}), profile);
}

/// E_F(gamma_t o phi) via the conformal factor: int F(alpha_t^2(phi) e) dv.
/// heights[i] = <u, phi(x_i)> for the flow's unit direction; s is the unit-speed time.
inline double composed_energy_fast(const DomainManifold& domain, const MapFields& fields,
                                   std::span<const double> heights, const FProfile& profile, double s)
{
    std::vector<double> integrand(fields.count);
    const double ch = std::cosh(s);
    const double sh = std::sinh(s);
    parallel_for(fields.count, [&](std::size_t i) {
        const double alpha = 1.0 / (ch + heights[i] * sh);
        integrand[i] = profile.value(alpha * alpha * fields.density[i]);
    });
    return integrate(domain, integrand);
}

inline std::vector<double> heights_of(const MapFields& fields, const Point& u)
{
    if (u.size() != fields.ambient_dim)
        throw ConfigError("direction dimension does not match the target");
    std::vector<double> h(fields.count);
    for (std::size_t i = 0; i < fields.count; ++i)
        h[i] = u.dot(fields.point(i));
    return h;
}

struct ComposedEnergy {
    double direct = 0.0; ///< E_F of the composed map with finite-difference differentials
    double fast = 0.0;   ///< int F(alpha^2 e) dv
    double discrepancy() const { return std::abs(direct - fast); }
    bool consistent() const { return discrepancy() <= 1e-5 * (1.0 + std::abs(fast)); }
};

/// Both evaluations of E_F(gamma_t o phi), without judging them.
inline ComposedEnergy f_energy_composed_both(const SmoothMap& map, const MapFields& fields, const FProfile& profile,
                                             const ConformalFlow& flow)
{
    ComposedEnergy out;
    const SmoothMap composed = compose_with_flow(map, flow);
    out.direct = f_energy(map.domain(), compute_fields(composed, FieldOptions{false}), profile);
    out.fast = composed_energy_fast(map.domain(), fields, heights_of(fields, flow.unit()), profile, flow.parameter());
    return out;
}

/// E_F(gamma_t o phi) from the composed map; throws NumericError when the
/// conformal-factor evaluation disagrees by more than 1e-5 (1 + |E|).
inline double f_energy_composed(const SmoothMap& map, const FProfile& profile, const ConformalFlow& flow)
{
    const MapFields fields = compute_fields(map, FieldOptions{false});
    const ComposedEnergy both = f_energy_composed_both(map, fields, profile, flow);
    if (!both.consistent()) {
        std::ostringstream os;
        os.precision(17);
        os << "f_energy_composed: direct " << both.direct << " vs conformal-factor " << both.fast;
        throw NumericError(os.str());
    }
    return both.direct;
}

// ---------------------------------------------------------------------------
// F-tension

struct TensionField {
    int ambient_dim = 0;
    std::vector<double> values; ///< ambient x count
    double sup_norm = 0.0;
    double max_normal_component = 0.0; ///< max |<tau, phi>|

    Point at(std::size_t i) const
    {
        return Eigen::Map<const Eigen::VectorXd>(values.data() + i * ambient_dim, ambient_dim);
    }
};

/// Step for the outer (divergence) difference in f_tension along axis k. Along
/// bounded axes it shrinks with the distance to the chart edge, which keeps the
/// truncation error relative near coordinate singularities. The step is a
/// power of two so that u(k) +- h and u(k) +- 2h are exact.
inline double tension_step(const Chart& chart, const Coords& u, int k)
{
    double h = 1e-3 * chart.scale();
    if (!chart.periodic[k])
        h = std::min(h, 1e-3 * std::min(u(k) - chart.lower(k), chart.upper(k) - u(k)));
    return h > 0.0 ? std::ldexp(1.0, std::ilogb(h)) : 0.0;
}

/// tau_F = Pi_phi [ (1/sqrt g) d_i ( sqrt g g^{ij} F'(e) d_j phi ) ] with
/// Pi_y = I - y y^T. The flux is differenced with the fourth-order central stencil.
inline TensionField f_tension(const SmoothMap& map, const FProfile& profile)
{
    const DomainManifold& dom = map.domain();
    const int n1 = map.ambient_dim();
    TensionField out;
    out.ambient_dim = n1;
    out.values.assign(dom.node_count() * n1, 0.0);

    for (std::size_t i = 0; i < dom.node_count(); ++i) {
        const QuadratureNode& q = dom.node(i);
        const Chart& chart = dom.charts[q.chart];
        for (int k = 0; k < chart.dim(); ++k) {
            const double h = tension_step(chart, q.u, k);
            if (!(h > 0.0)
                || (!chart.periodic[k] && (q.u(k) - 2.0 * h <= chart.lower(k) || q.u(k) + 2.0 * h >= chart.upper(k))))
                throw ContractViolation("f_tension: stencil around a node leaves the chart");
        }
    }

    // sqrt(g) g^{kj} F'(e) d_j phi, column k
    auto flux = [&](std::size_t chart_id, const Coords& u) {
        const Chart& chart = dom.charts[chart_id];
        const Jacobian J = chart_jacobian(map, chart_id, u);
        const SquareMatrix g = chart.metric(u);
        const SquareMatrix ginv = g.inverse();
        const double e = 0.5 * (J.transpose() * J * ginv).trace();
        return Jacobian(chart.volume_density(u) * profile.first(e) * J * ginv);
    };

    std::vector<double> sq(dom.node_count());
    std::vector<double> normal(dom.node_count());
    parallel_for(dom.node_count(), [&](std::size_t i) {
        const QuadratureNode& q = dom.node(i);
        const Chart& chart = dom.charts[q.chart];
        const int m = chart.dim();
        Point div = Point::Zero(n1);
        for (int k = 0; k < m; ++k) {
            const double h = tension_step(chart, q.u, k);
            auto shifted = [&](double d) {
                Coords w = q.u;
                w(k) += d;
                return Point(flux(q.chart, w).col(k));
            };
            div += (8.0 * (shifted(h) - shifted(-h)) - (shifted(2.0 * h) - shifted(-2.0 * h))) / (12.0 * h);
        }
        div /= chart.volume_density(q.u);
        const Point y = map(q.chart, q.u);
        const Point tau = div - y.dot(div) * y;
        Eigen::Map<Eigen::VectorXd>(out.values.data() + i * n1, n1) = tau;
        sq[i] = tau.norm();
        normal[i] = std::abs(tau.dot(y));
    });
    out.sup_norm = *std::max_element(sq.begin(), sq.end());
    out.max_normal_component = *std::max_element(normal.begin(), normal.end());
    return out;
}

/// d/dt E_F(gamma_t o phi) at t = 0 from the tension: -int <vbar o phi, tau_F> dv.
inline double first_variation(const SmoothMap& map, const MapFields& fields, const TensionField& tension,
                              const Point& v)
{
    if (v.size() != map.ambient_dim())
        throw ConfigError("first_variation: direction dimension does not match the target");
    std::vector<double> integrand(fields.count);
    parallel_for(fields.count, [&](std::size_t i) {
        const Point y = fields.point(i);
        integrand[i] = -vbar(v, y).dot(tension.at(i));
    });
    return integrate(map.domain(), integrand);
}

inline double first_variation(const SmoothMap& map, const FProfile& profile, const Point& v)
{
    return first_variation(map, compute_fields(map, FieldOptions{false}), f_tension(map, profile), v);
}

// ---------------------------------------------------------------------------
// Stress-energy tensor

/// Every stress-type tensor here has the form a g - b phi^*can.
struct StressCoefficients {
    double a = 0.0;
    double b = 0.0;

    /// Smallest eigenvalue of a I - b P given the extreme eigenvalues of P.
    double min_eigenvalue(double p_min, double p_max) const { return b >= 0.0 ? a - b * p_max : a - b * p_min; }
};

/// S^F = F'(e) e g - [F'(e) + e F''(e)] phi^*can.
inline StressCoefficients stress_coefficients(const FProfile& profile, double e)
{
    const double d1 = profile.first(e);
    return {d1 * e, d1 + e * profile.second(e)};
}

/// S^F(gamma o phi) expressed on phi's pullback: the composed density is u e and
/// the composed pullback is u phi^*can, u = alpha^2.
inline StressCoefficients composed_stress_coefficients(const FProfile& profile, double e, double u)
{
    const double x = u * e;
    const double d1 = profile.first(x);
    return {d1 * x, (d1 + x * profile.second(x)) * u};
}

struct StressField {
    int dim = 0;
    std::vector<double> tensors; ///< dim x dim per node
    std::vector<double> min_eig;
    double global_min = 0.0; ///< S^{o,F}

    SquareMatrix at(std::size_t i) const
    {
        return Eigen::Map<const Eigen::MatrixXd>(tensors.data() + i * dim * dim, dim, dim);
    }
};

/// Per-node S^F in the orthonormal frame and its smallest eigenvalue.
inline StressField stress_field(const MapFields& fields, const FProfile& profile)
{
    const int m = fields.domain_dim;
    StressField out;
    out.dim = m;
    out.tensors.resize(fields.count * m * m);
    out.min_eig.resize(fields.count);
    parallel_for(fields.count, [&](std::size_t i) {
        const StressCoefficients c = stress_coefficients(profile, fields.density[i]);
        const SquareMatrix S = c.a * SquareMatrix::Identity(m, m) - c.b * fields.pullback(i);
        Eigen::Map<Eigen::MatrixXd>(out.tensors.data() + i * m * m, m, m) = S;
        Eigen::SelfAdjointEigenSolver<SquareMatrix> eig(S, Eigen::EigenvaluesOnly);
        out.min_eig[i] = eig.eigenvalues().minCoeff();
    });
    out.global_min = *std::min_element(out.min_eig.begin(), out.min_eig.end());
    return out;
}

inline StressField stress_field(const SmoothMap& map, const FProfile& profile)
{
    return stress_field(compute_fields(map), profile);
}

} // namespace fharm
