#pragma once

#include "fharm/core.hpp"

#include <cmath>
#include <string>

namespace fharm {

enum class ProfileKind { Power, ExpType, SacksUhlenbeck, Custom };

/// Which tensor of phi the composed stress is compared against.
enum class ComparisonReference {
    ProfileStress,  ///< S^F(phi)
    HarmonicStress, ///< e g - phi^* can
};

namespace detail {

/// x^k for integer k >= 0 by repeated squaring; k < 0 falls back to pow.
inline double int_pow(double x, double k)
{
    const double r = std::round(k);
    if (r != k || r < 0.0 || r > 64.0)
        return std::pow(x, k);
    double result = 1.0;
    for (auto n = static_cast<unsigned>(r); n; n >>= 1) {
        if (n & 1u)
            result *= x;
        x *= x;
    }
    return result;
}

} // namespace detail

/// A profile F: [0, inf) -> [0, inf) with its first two derivatives and the
/// comparison data used to certify admissibility:
///   S^F(gamma o phi) >= factor(alpha^2, e) * reference(phi).
struct FProfile {
    ProfileKind kind = ProfileKind::Custom;
    double parameter = 0.0;
    std::string label;
    std::function<double(double)> F;
    std::function<double(double)> dF;
    std::function<double(double)> ddF;
    ComparisonReference reference = ComparisonReference::ProfileStress;
    std::function<double(double u, double e)> comparison_factor;

    /// Scale applied on top of the closed forms of the built-in families.
    double scale = 1.0;

    double value(double t) const
    {
        switch (kind) {
        case ProfileKind::Power:
            return parameter == 2.0 ? scale * t : scale * detail::int_pow(2.0 * t, 0.5 * parameter) / parameter;
        case ProfileKind::ExpType:
            return scale * (1.0 + parameter * t - std::exp(-t));
        case ProfileKind::SacksUhlenbeck:
            return scale * std::pow(1.0 + 2.0 * t, parameter);
        case ProfileKind::Custom:
            break;
        }
        return F(t);
    }

    double first(double t) const
    {
        switch (kind) {
        case ProfileKind::Power:
            return parameter == 2.0 ? scale : scale * detail::int_pow(2.0 * t, 0.5 * parameter - 1.0);
        case ProfileKind::ExpType:
            return scale * (parameter + std::exp(-t));
        case ProfileKind::SacksUhlenbeck:
            return scale * 2.0 * parameter * std::pow(1.0 + 2.0 * t, parameter - 1.0);
        case ProfileKind::Custom:
            break;
        }
        return dF(t);
    }

    double second(double t) const
    {
        switch (kind) {
        case ProfileKind::Power:
            return parameter == 2.0 ? 0.0 : scale * (parameter - 2.0) * detail::int_pow(2.0 * t, 0.5 * parameter - 2.0);
        case ProfileKind::ExpType:
            return -scale * std::exp(-t);
        case ProfileKind::SacksUhlenbeck:
            return scale * 4.0 * parameter * (parameter - 1.0) * std::pow(1.0 + 2.0 * t, parameter - 2.0);
        case ProfileKind::Custom:
            break;
        }
        return ddF(t);
    }

    /// c * F; the comparison factor is unchanged.
    FProfile scaled(double c) const
    {
        if (!(c > 0.0))
            throw ConfigError("profile scaling must be positive");
        FProfile out = *this;
        out.F = [f = F, c](double t) { return c * f(t); };
        out.dF = [f = dF, c](double t) { return c * f(t); };
        out.ddF = [f = ddF, c](double t) { return c * f(t); };
        out.scale = scale * c;
        out.label = std::to_string(c) + "*" + label;
        return out;
    }
};

/// F(t) = (2t)^{p/2} / p for p = 2 or p >= 4, with theta(u) = u^{p/2}.
inline FProfile make_power(double p)
{
    if (!(p == 2.0 || p >= 4.0) || !std::isfinite(p))
        throw ConfigError("power profile: p must be 2 or >= 4, got " + std::to_string(p));
    FProfile f;
    f.kind = ProfileKind::Power;
    f.parameter = p;
    f.label = "power(p=" + std::to_string(p) + ")";
    if (p == 2.0) {
        f.F = [](double t) { return t; };
        f.dF = [](double) { return 1.0; };
        f.ddF = [](double) { return 0.0; };
    } else {
        f.F = [p](double t) { return std::pow(2.0 * t, 0.5 * p) / p; };
        f.dF = [p](double t) { return std::pow(2.0 * t, 0.5 * p - 1.0); };
        f.ddF = [p](double t) { return (p - 2.0) * std::pow(2.0 * t, 0.5 * p - 2.0); };
    }
    f.reference = ComparisonReference::ProfileStress;
    f.comparison_factor = [p](double u, double) { return std::pow(u, 0.5 * p); };
    return f;
}

/// F(t) = 1 + a t - exp(-t), a > 0. The composed stress splits as
///   S^F(gamma o phi) = u (a + e^{-u e}) (e g - phi^* can) + u^2 e e^{-u e} phi^* can,
/// so it is compared against the harmonic stress with factor u (a + e^{-u e}).
inline FProfile make_exp_type(double a)
{
    if (!(a > 0.0) || !std::isfinite(a))
        throw ConfigError("exp-type profile: a must be positive, got " + std::to_string(a));
    FProfile f;
    f.kind = ProfileKind::ExpType;
    f.parameter = a;
    f.label = "exp(a=" + std::to_string(a) + ")";
    f.F = [a](double t) { return 1.0 + a * t - std::exp(-t); };
    f.dF = [a](double t) { return a + std::exp(-t); };
    f.ddF = [](double t) { return -std::exp(-t); };
    f.reference = ComparisonReference::HarmonicStress;
    f.comparison_factor = [a](double u, double e) { return u * (a + std::exp(-u * e)); };
    return f;
}

/// F(t) = (1 + 2t)^alpha, 0 < alpha < 1, with theta(u) = u^2.
inline FProfile make_sacks_uhlenbeck(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("sacks-uhlenbeck profile: alpha must lie in (0, 1), got " + std::to_string(alpha));
    FProfile f;
    f.kind = ProfileKind::SacksUhlenbeck;
    f.parameter = alpha;
    f.label = "sacks-uhlenbeck(alpha=" + std::to_string(alpha) + ")";
    f.F = [alpha](double t) { return std::pow(1.0 + 2.0 * t, alpha); };
    f.dF = [alpha](double t) { return 2.0 * alpha * std::pow(1.0 + 2.0 * t, alpha - 1.0); };
    f.ddF = [alpha](double t) { return 4.0 * alpha * (alpha - 1.0) * std::pow(1.0 + 2.0 * t, alpha - 2.0); };
    f.reference = ComparisonReference::ProfileStress;
    f.comparison_factor = [](double u, double) { return u * u; };
    return f;
}

/// User-supplied profile; theta(u) compares against S^F(phi).
inline FProfile make_custom(std::string label, std::function<double(double)> F, std::function<double(double)> dF,
                            std::function<double(double)> ddF, std::function<double(double)> theta)
{
    FProfile f;
    f.kind = ProfileKind::Custom;
    f.label = std::move(label);
    f.F = std::move(F);
    f.dF = std::move(dF);
    f.ddF = std::move(ddF);
    f.reference = ComparisonReference::ProfileStress;
    f.comparison_factor = [theta = std::move(theta)](double u, double) { return theta(u); };
    return f;
}

/// B = (F''(u e)/F'(u e) * u - F''(e)/F'(e)) * phi_v with u = alpha_t^2.
/// Exactly 0 at u = 1. Nodes with e = 0 and F'(0) = 0 carry no energy and give 0.
inline double admissibility_B(const FProfile& profile, double e, double alpha_sq, double phi_v)
{
    if (e < 0.0)
        throw ContractViolation("admissibility_B: negative energy density");
    if (alpha_sq == 1.0)
        return 0.0;
    const double x = alpha_sq * e;
    const double d0 = profile.first(e);
    const double d1 = profile.first(x);
    if (d0 == 0.0 || d1 == 0.0) {
        if (e > 0.0)
            throw ContractViolation("admissibility_B: F' vanishes at a positive argument for " + profile.label);
        return 0.0;
    }
    return (profile.second(x) / d1 * alpha_sq - profile.second(e) / d0) * phi_v;
}

/// Auxiliary function of the exp-type profile,
///   w(u) = -u e^{-u e} / (a + e^{-u e}) + e^{-e} / (a + e^{-e}),
/// so that B = w(alpha^2) * phi_v.
inline double exp_type_auxiliary(double u, double e, double a)
{
    const double wu = std::exp(-u * e);
    const double w1 = std::exp(-e);
    return -u * wu / (a + wu) + w1 / (a + w1);
}

/// d/du of exp_type_auxiliary: -w (a (1 - u e) + w) / (a + w)^2 with w = e^{-u e}.
inline double exp_type_auxiliary_derivative(double u, double e, double a)
{
    const double w = std::exp(-u * e);
    return -w * (a * (1.0 - u * e) + w) / ((a + w) * (a + w));
}

} // namespace fharm
