#pragma once

#include "fharm/core.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace fharm {

/// Tangential part of the constant vector v at y in S^n: v - <v,y> y.
inline Point vbar(const Point& v, const Point& y)
{
    return v - v.dot(y) * y;
}

/// One-parameter group generated by vbar for a direction v. The direction is
/// stored normalized; the flow of v at time t is the flow of v/|v| at time |v| t.
class ConformalFlow {
public:
    ConformalFlow(const Point& v, double t)
        : time_(t)
    {
        magnitude_ = v.norm();
        if (!(magnitude_ > 0.0) || !std::isfinite(magnitude_))
            throw ConfigError("conformal flow: direction must be a nonzero finite vector");
        if (v.size() > kMaxAmbient)
            throw ConfigError("conformal flow: ambient dimension above " + std::to_string(kMaxAmbient));
        unit_ = v / magnitude_;
    }

    const Point& unit() const { return unit_; }
    double magnitude() const { return magnitude_; }
    double time() const { return time_; }
    int ambient_dim() const { return static_cast<int>(unit_.size()); }

    /// Time of the equivalent unit-speed flow.
    double parameter() const { return magnitude_ * time_; }

    ConformalFlow at(double t) const
    {
        ConformalFlow copy = *this;
        copy.time_ = t;
        return copy;
    }

    ConformalFlow reversed() const
    {
        ConformalFlow copy = *this;
        copy.unit_ = -unit_;
        return copy;
    }

private:
    Point unit_;
    double magnitude_ = 1.0;
    double time_ = 0.0;
};

/// Closed form of the flow: write y = c u + y_perp, then
/// gamma_s(y) = [(c cosh s + sinh s) u + y_perp] / (cosh s + c sinh s).
inline Point flow_apply(const ConformalFlow& flow, const Point& y)
{
    const Point& u = flow.unit();
    const double s = flow.parameter();
    const double c = u.dot(y);
    const double ch = std::cosh(s);
    const double sh = std::sinh(s);
    Point out = ((c * ch + sh) * u + (y - c * u)) / (ch + c * sh);
    out /= out.norm();
    return out;
}

/// alpha with gamma^* can = alpha^2 can; equals 1 / (cosh s + <u,y> sinh s).
inline double conformal_factor(const ConformalFlow& flow, const Point& y)
{
    const double s = flow.parameter();
    return 1.0 / (std::cosh(s) + flow.unit().dot(y) * std::sinh(s));
}

/// Same as conformal_factor but from a precomputed <u, y>.
inline double conformal_factor_from_height(double s, double height)
{
    return 1.0 / (std::cosh(s) + height * std::sinh(s));
}

/// RK4 integration of y' = vbar(y) for the unit direction, renormalizing every step.
/// Independent of the closed form in flow_apply.
inline Point flow_ode_oracle(const ConformalFlow& flow, const Point& y, int steps)
{
    if (steps < 100)
        throw ContractViolation("flow_ode_oracle: at least 100 steps required");
    const Point& u = flow.unit();
    const double total = flow.parameter();
    if (total == 0.0)
        return y;
    const double h = total / steps;
    Point x = y;
    for (int k = 0; k < steps; ++k) {
        const Point k1 = vbar(u, x);
        const Point k2 = vbar(u, Point(x + 0.5 * h * k1));
        const Point k3 = vbar(u, Point(x + 0.5 * h * k2));
        const Point k4 = vbar(u, Point(x + h * k3));
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        x /= x.norm();
    }
    return x;
}

/// gamma = r o gamma_t^v with r in O(n+1).
class ConformalDiffeo {
public:
    ConformalDiffeo(const AmbientMatrix& rotation, ConformalFlow flow)
        : rotation_(rotation)
        , flow_(std::move(flow))
    {
        const int n1 = flow_.ambient_dim();
        if (rotation_.rows() != n1 || rotation_.cols() != n1)
            throw ConfigError("conformal diffeo: rotation has the wrong size");
        const double err = (rotation_.transpose() * rotation_ - AmbientMatrix::Identity(n1, n1)).cwiseAbs().maxCoeff();
        if (!(err <= 1e-12))
            throw ConfigError("conformal diffeo: rotation is not orthogonal (|r^T r - I| = " + std::to_string(err) + ")");
    }

    const AmbientMatrix& rotation() const { return rotation_; }
    const ConformalFlow& flow() const { return flow_; }

private:
    AmbientMatrix rotation_;
    ConformalFlow flow_;
};

inline Point compose_diffeo(const ConformalDiffeo& d, const Point& y)
{
    Point out = d.rotation() * flow_apply(d.flow(), y);
    out /= out.norm();
    return out;
}

/// Rotations are isometries, so the factor is that of the flow part.
inline double conformal_factor(const ConformalDiffeo& d, const Point& y)
{
    return conformal_factor(d.flow(), y);
}

/// Rotation by angle in the (i, j) coordinate plane of R^dim.
inline AmbientMatrix plane_rotation(int dim, int i, int j, double angle)
{
    AmbientMatrix r = AmbientMatrix::Identity(dim, dim);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    r(i, i) = c;
    r(j, j) = c;
    r(i, j) = -s;
    r(j, i) = s;
    return r;
}

/// Unit vector e_k of R^dim (0-based k).
inline Point basis_vector(int dim, int k)
{
    Point e = Point::Zero(dim);
    e(k) = 1.0;
    return e;
}

/// count unit vectors of R^dim drawn from a seeded Gaussian, so the set is reproducible.
inline std::vector<Point> random_unit_directions(int dim, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Point> out;
    out.reserve(count);
    while (static_cast<int>(out.size()) < count) {
        Point v(dim);
        for (int k = 0; k < dim; ++k)
            v(k) = normal(rng);
        const double n = v.norm();
        if (n < 1e-8)
            continue;
        out.push_back(v / n);
    }
    return out;
}

} // namespace fharm
