#pragma once

#include "fharm/manifold.hpp"
#include "fharm/sphere_target.hpp"

#include <memory>
#include <optional>
#include <string>

namespace fharm {

/// A map from a domain manifold into the unit sphere S^n of R^{n+1}.
class SmoothMap {
public:
    using Evaluator = std::function<Point(std::size_t chart, const Coords& u)>;
    /// (n+1) x m partials with respect to the chart coordinates.
    using JacobianEvaluator = std::function<Jacobian(std::size_t chart, const Coords& u)>;

    SmoothMap(std::shared_ptr<const DomainManifold> domain, int target_dim, Evaluator eval,
              JacobianEvaluator jacobian = {}, std::string name = "custom")
        : domain_(std::move(domain))
        , target_dim_(target_dim)
        , eval_(std::move(eval))
        , jacobian_(std::move(jacobian))
        , name_(std::move(name))
    {
        if (!domain_)
            throw ConfigError("smooth map: missing domain");
        if (target_dim_ < 2)
            throw ConfigError("smooth map: target sphere dimension must be >= 2");
        if (target_dim_ + 1 > kMaxAmbient)
            throw ConfigError("smooth map: target dimension above " + std::to_string(kMaxAmbient - 1));
    }

    const DomainManifold& domain() const { return *domain_; }
    const std::shared_ptr<const DomainManifold>& domain_ptr() const { return domain_; }
    int target_dim() const { return target_dim_; }
    int ambient_dim() const { return target_dim_ + 1; }
    int domain_dim() const { return domain_->dim; }
    const std::string& name() const { return name_; }
    bool has_jacobian() const { return static_cast<bool>(jacobian_); }

    Point operator()(std::size_t chart, const Coords& u) const { return eval_(chart, u); }
    Jacobian jacobian(std::size_t chart, const Coords& u) const { return jacobian_(chart, u); }

private:
    std::shared_ptr<const DomainManifold> domain_;
    int target_dim_;
    Evaluator eval_;
    JacobianEvaluator jacobian_;
    std::string name_;
};

/// Central-difference step for first derivatives of maps along axis k: a power
/// of two near 1e-4 times the chart scale, kept within a tenth of the distance
/// to the chart edge on bounded axes.
inline double fd_step(const Chart& chart, const Coords& u, int k)
{
    double h = 1e-4 * chart.scale();
    if (!chart.periodic[k])
        h = std::min(h, 0.1 * std::min(u(k) - chart.lower(k), chart.upper(k) - u(k)));
    return h > 0.0 ? std::ldexp(1.0, std::ilogb(h)) : 0.0;
}

/// Chart-coordinate partials: analytic when the map provides them, central
/// differences otherwise.
inline Jacobian chart_jacobian(const SmoothMap& map, std::size_t chart_id, const Coords& u)
{
    if (map.has_jacobian())
        return map.jacobian(chart_id, u);
    const Chart& chart = map.domain().charts[chart_id];
    const int m = chart.dim();
    Jacobian J(map.ambient_dim(), m);
    for (int k = 0; k < m; ++k) {
        const double h = fd_step(chart, u, k);
        if (!(h > 0.0))
            throw ContractViolation("chart_jacobian: point lies on the chart edge");
        Coords up = u;
        Coords dn = u;
        up(k) += h;
        dn(k) -= h;
        J.col(k) = (map(chart_id, up) - map(chart_id, dn)) / (2.0 * h);
    }
    return J;
}

/// d phi in a g-orthonormal frame at an arbitrary chart point.
inline Jacobian differential_at(const SmoothMap& map, std::size_t chart_id, const Coords& u)
{
    const Chart& chart = map.domain().charts[chart_id];
    return chart_jacobian(map, chart_id, u) * orthonormal_frame(chart, u);
}

/// d phi in the orthonormal frame at a quadrature node.
inline Jacobian differential(const SmoothMap& map, std::size_t node)
{
    const DomainManifold& dom = map.domain();
    if (node >= dom.node_count())
        throw ContractViolation("differential: node index out of range");
    const QuadratureNode& q = dom.node(node);
    const Chart& chart = dom.charts[q.chart];
    if (!chart.contains_interior(q.u))
        throw ContractViolation("differential: node lies outside its chart");
    return differential_at(map, q.chart, q.u);
}

/// Energy density |d phi|^2 / 2 at an arbitrary chart point.
inline double density_at(const SmoothMap& map, std::size_t chart_id, const Coords& u)
{
    return 0.5 * differential_at(map, chart_id, u).squaredNorm();
}

/// Direction-dependent per-node data for a unit direction u.
struct DirectionalFields {
    Point direction;
    std::vector<double> height;         ///< phi_v = <v, phi>
    std::vector<double> grad_height_sq; ///< |d phi_v|^2
    std::vector<double> vbar_sq;        ///< |vbar o phi|^2
};

struct FieldOptions {
    /// Keep the per-node differential. Needed for direction-dependent data
    /// and for stress tensors; large energy-only runs can drop it.
    bool store_differential = true;
};

/// Per-node first-order data of a map, in the orthonormal frame.
struct MapFields {
    int domain_dim = 0;
    int ambient_dim = 0;
    std::size_t count = 0;
    std::vector<double> points;       ///< ambient x count
    std::vector<double> differential; ///< ambient x domain_dim per node, column major
    std::vector<double> density;      ///< e = |d phi|^2 / 2
    std::vector<double> pullback_min; ///< smallest eigenvalue of phi^* can
    std::vector<double> pullback_max; ///< largest eigenvalue of phi^* can
    std::optional<DirectionalFields> directional;

    bool has_differential() const { return !differential.empty(); }

    Point point(std::size_t i) const
    {
        return Eigen::Map<const Eigen::VectorXd>(points.data() + i * ambient_dim, ambient_dim);
    }

    Jacobian diff(std::size_t i) const
    {
        if (!has_differential())
            throw ContractViolation("MapFields: differential was not stored");
        const std::size_t stride = static_cast<std::size_t>(ambient_dim) * domain_dim;
        return Eigen::Map<const Eigen::MatrixXd>(differential.data() + i * stride, ambient_dim, domain_dim);
    }

    /// phi^* can in the frame: D^T D.
    SquareMatrix pullback(std::size_t i) const
    {
        const Jacobian D = diff(i);
        return D.transpose() * D;
    }
};

inline DirectionalFields directional_fields(const MapFields& fields, const Point& v)
{
    if (v.size() != fields.ambient_dim)
        throw ConfigError("directional fields: direction has dimension " + std::to_string(v.size())
                          + ", target ambient dimension is " + std::to_string(fields.ambient_dim));
    if (!fields.has_differential())
        throw ContractViolation("directional fields: differential was not stored");
    DirectionalFields out;
    out.direction = v;
    out.height.resize(fields.count);
    out.grad_height_sq.resize(fields.count);
    out.vbar_sq.resize(fields.count);
    const double vv = v.squaredNorm();
    parallel_for(fields.count, [&](std::size_t i) {
        const Point y = fields.point(i);
        const double h = v.dot(y);
        out.height[i] = h;
        out.vbar_sq[i] = std::max(0.0, vv - h * h);
        // columns of D are tangent to S^n, so <v, D e_i> = <vbar o phi, D e_i>
        const Point vb = vbar(v, y);
        out.grad_height_sq[i] = (fields.diff(i).transpose() * vb).squaredNorm();
    });
    return out;
}

/// Evaluates the map, its frame differential and the energy density at every node.
inline MapFields compute_fields(const SmoothMap& map, FieldOptions options = {})
{
    const DomainManifold& dom = map.domain();
    MapFields f;
    f.domain_dim = dom.dim;
    f.ambient_dim = map.ambient_dim();
    f.count = dom.node_count();
    const std::size_t stride = static_cast<std::size_t>(f.ambient_dim) * f.domain_dim;
    f.points.resize(f.count * f.ambient_dim);
    if (options.store_differential)
        f.differential.resize(f.count * stride);
    f.density.resize(f.count);
    f.pullback_min.resize(f.count);
    f.pullback_max.resize(f.count);

    for (const Chart& chart : dom.charts)
        if (!map.has_jacobian() && chart.dim() != dom.dim)
            throw ContractViolation("compute_fields: chart dimension mismatch");

    std::vector<double> norm_err(f.count);
    std::vector<double> tangency_err(f.count);
    parallel_for(f.count, [&](std::size_t i) {
        const QuadratureNode& q = dom.node(i);
        const Chart& chart = dom.charts[q.chart];
        const Point y = map(q.chart, q.u);
        const Jacobian J = chart_jacobian(map, q.chart, q.u);
        const Jacobian D = J * orthonormal_frame(chart, q.u);
        Eigen::Map<Eigen::VectorXd>(f.points.data() + i * f.ambient_dim, f.ambient_dim) = y;
        if (options.store_differential)
            Eigen::Map<Eigen::MatrixXd>(f.differential.data() + i * stride, f.ambient_dim, f.domain_dim) = D;
        f.density[i] = 0.5 * D.squaredNorm();
        const SquareMatrix P = D.transpose() * D;
        Eigen::SelfAdjointEigenSolver<SquareMatrix> eig(P, Eigen::EigenvaluesOnly);
        f.pullback_min[i] = eig.eigenvalues().minCoeff();
        f.pullback_max[i] = eig.eigenvalues().maxCoeff();
        norm_err[i] = std::abs(y.norm() - 1.0);
        tangency_err[i] = map.has_jacobian() ? (J.transpose() * y).cwiseAbs().maxCoeff() : 0.0;
    });
    const double worst_norm = *std::max_element(norm_err.begin(), norm_err.end());
    if (worst_norm > 1e-10)
        throw NumericError("map '" + map.name() + "' leaves the unit sphere by " + std::to_string(worst_norm));
    const double worst_tan = *std::max_element(tangency_err.begin(), tangency_err.end());
    if (worst_tan > 1e-8)
        throw NumericError("map '" + map.name() + "': analytic Jacobian is not tangent to the sphere (error "
                           + std::to_string(worst_tan) + ")");
    return f;
}

/// compute_fields plus the direction-dependent data for v.
inline MapFields compute_fields(const SmoothMap& map, const Point& v)
{
    MapFields f = compute_fields(map);
    f.directional = directional_fields(f, v);
    return f;
}

/// gamma o phi for a conformal flow. The result has no analytic Jacobian, so its
/// differential always comes from finite differences of the composition.
inline SmoothMap compose_with_flow(const SmoothMap& map, const ConformalFlow& flow)
{
    if (flow.ambient_dim() != map.ambient_dim())
        throw ConfigError("compose_with_flow: flow lives in R^" + std::to_string(flow.ambient_dim())
                          + " but the map targets S^" + std::to_string(map.target_dim()));
    SmoothMap::Evaluator eval = [map, flow](std::size_t chart, const Coords& u) {
        return flow_apply(flow, map(chart, u));
    };
    return SmoothMap(map.domain_ptr(), map.target_dim(), std::move(eval), {}, map.name() + "|flow");
}

inline SmoothMap compose_with_diffeo(const SmoothMap& map, const ConformalDiffeo& diffeo)
{
    if (diffeo.flow().ambient_dim() != map.ambient_dim())
        throw ConfigError("compose_with_diffeo: dimension mismatch");
    SmoothMap::Evaluator eval = [map, diffeo](std::size_t chart, const Coords& u) {
        return compose_diffeo(diffeo, map(chart, u));
    };
    return SmoothMap(map.domain_ptr(), map.target_dim(), std::move(eval), {}, map.name() + "|diffeo");
}

// ---------------------------------------------------------------------------
// Built-in maps

/// Identity S^m -> S^m through the standard embedding.
inline SmoothMap identity_map(std::shared_ptr<const DomainManifold> domain)
{
    if (domain->kind != DomainKind::Sphere)
        throw ConfigError("identity map needs a sphere domain");
    const int m = domain->dim;
    auto dom = domain;
    SmoothMap::Evaluator eval = [dom](std::size_t chart, const Coords& u) { return dom->charts[chart].embedding(u); };
    SmoothMap::JacobianEvaluator jac = [dom](std::size_t chart, const Coords& u) {
        return dom->charts[chart].embedding_jacobian(u);
    };
    return SmoothMap(std::move(domain), m, std::move(eval), std::move(jac), "identity");
}

/// Totally geodesic inclusion S^m -> S^n, x -> (x, 0, ..., 0).
inline SmoothMap equator_map(std::shared_ptr<const DomainManifold> domain, int target_dim)
{
    if (domain->kind != DomainKind::Sphere)
        throw ConfigError("equator map needs a sphere domain");
    const int m = domain->dim;
    if (target_dim <= m)
        throw ConfigError("equator map: target dimension must exceed the domain dimension");
    auto dom = domain;
    SmoothMap::Evaluator eval = [dom, target_dim, m](std::size_t chart, const Coords& u) {
        Point y = Point::Zero(target_dim + 1);
        y.head(m + 1) = dom->charts[chart].embedding(u);
        return y;
    };
    SmoothMap::JacobianEvaluator jac = [dom, target_dim, m](std::size_t chart, const Coords& u) {
        Jacobian J = Jacobian::Zero(target_dim + 1, m);
        J.topRows(m + 1) = dom->charts[chart].embedding_jacobian(u);
        return J;
    };
    return SmoothMap(std::move(domain), target_dim, std::move(eval), std::move(jac), "equator");
}

/// Constant map onto a point of S^n.
inline SmoothMap constant_map(std::shared_ptr<const DomainManifold> domain, const Point& value)
{
    const double n = value.norm();
    if (std::abs(n - 1.0) > 1e-12)
        throw ConfigError("constant map: value must be a unit vector");
    const int m = domain->dim;
    const int ambient = static_cast<int>(value.size());
    Point y = value;
    SmoothMap::Evaluator eval = [y](std::size_t, const Coords&) { return y; };
    SmoothMap::JacobianEvaluator jac = [ambient, m](std::size_t, const Coords&) { return Jacobian::Zero(ambient, m); };
    return SmoothMap(std::move(domain), ambient - 1, std::move(eval), std::move(jac), "constant");
}

/// Clifford-type map of a square flat 2-torus into S^3:
/// (u1, u2) -> (cos a1, sin a1, cos a2, sin a2) / sqrt(2) with a_k = 2 pi u_k / period.
inline SmoothMap clifford_map(std::shared_ptr<const DomainManifold> domain)
{
    if (domain->kind != DomainKind::FlatTorus || domain->dim != 2)
        throw ConfigError("clifford map needs a flat 2-torus domain");
    if (domain->periods[0] != domain->periods[1])
        throw ConfigError("clifford map needs equal periods (otherwise it is not harmonic)");
    const double k = 2.0 * std::numbers::pi / domain->periods[0];
    const double r = 1.0 / std::sqrt(2.0);
    SmoothMap::Evaluator eval = [k, r](std::size_t, const Coords& u) {
        Point y(4);
        y << std::cos(k * u(0)), std::sin(k * u(0)), std::cos(k * u(1)), std::sin(k * u(1));
        return Point(r * y);
    };
    SmoothMap::JacobianEvaluator jac = [k, r](std::size_t, const Coords& u) {
        Jacobian J = Jacobian::Zero(4, 2);
        J(0, 0) = -k * r * std::sin(k * u(0));
        J(1, 0) = k * r * std::cos(k * u(0));
        J(2, 1) = -k * r * std::sin(k * u(1));
        J(3, 1) = k * r * std::cos(k * u(1));
        return J;
    };
    return SmoothMap(std::move(domain), 3, std::move(eval), std::move(jac), "clifford");
}

} // namespace fharm
