#pragma once

#include "fharm/functionals.hpp"

#include <limits>

namespace fharm {

inline constexpr double kAdmissibilityBTolerance = 1e-12;
inline constexpr double kComparisonEigTolerance = 1e-10;

/// Admissibility data of a profile along one flow direction, over a time grid.
struct AdmissibilityReport {
    Point direction;
    std::vector<double> times;
    std::vector<double> min_B;              ///< per t, over nodes
    std::vector<double> max_abs_B;          ///< per t, over nodes
    std::vector<double> min_comparison_eig; ///< per t: min eigenvalue of S^F(gamma_t o phi) - theta * reference
    double worst_B = std::numeric_limits<double>::infinity();
    double worst_comparison_eig = std::numeric_limits<double>::infinity();
    bool B_ok = true;
    bool comparison_ok = true;

    bool admissible() const { return B_ok && comparison_ok; }
};

/// Smallest eigenvalue over nodes of S^F(gamma_t o phi) - theta(alpha^2, e) * reference(phi)
/// for one unit-speed time s, plus the B extremes.
struct AdmissibilityCell {
    double min_B = std::numeric_limits<double>::infinity();
    double max_abs_B = 0.0;
    double min_comparison_eig = std::numeric_limits<double>::infinity();
};

inline AdmissibilityCell admissibility_cell(const DomainManifold& domain, const MapFields& fields,
                                            std::span<const double> heights, const FProfile& profile, double s)
{
    const double ch = std::cosh(s);
    const double sh = std::sinh(s);
    // minima of B, -|B| and the comparison eigenvalue
    const auto red = integrate_fused<0, 3>(
        domain, [&](std::size_t i, std::array<double, 0>&, std::array<double, 3>& mins) {
            const double e = fields.density[i];
            const double alpha = 1.0 / (ch + heights[i] * sh);
            const double u = alpha * alpha;
            const double B = admissibility_B(profile, e, u, heights[i]);
            const StressCoefficients composed = composed_stress_coefficients(profile, e, u);
            const StressCoefficients ref = profile.reference == ComparisonReference::ProfileStress
                                               ? stress_coefficients(profile, e)
                                               : StressCoefficients{e, 1.0};
            const double theta = profile.comparison_factor(u, e);
            const StressCoefficients diff{composed.a - theta * ref.a, composed.b - theta * ref.b};
            mins[0] = B;
            mins[1] = -std::abs(B);
            mins[2] = diff.min_eigenvalue(fields.pullback_min[i], fields.pullback_max[i]);
        });
    AdmissibilityCell cell;
    cell.min_B = red.minima[0];
    cell.max_abs_B = -red.minima[1];
    cell.min_comparison_eig = red.minima[2];
    return cell;
}

/// Checks B >= 0 and S^F(gamma_t o phi) >= theta(alpha_t^2 o phi) reference(phi)
/// at every node and every t of the grid, for the unit direction u.
inline AdmissibilityReport check_tensor_comparison(const DomainManifold& domain, const MapFields& fields,
                                                   const FProfile& profile, const Point& u,
                                                   std::span<const double> times)
{
    AdmissibilityReport r;
    r.direction = u;
    const std::vector<double> heights = heights_of(fields, u);
    for (double t : times) {
        const AdmissibilityCell cell = admissibility_cell(domain, fields, heights, profile, t);
        r.times.push_back(t);
        r.min_B.push_back(cell.min_B);
        r.max_abs_B.push_back(cell.max_abs_B);
        r.min_comparison_eig.push_back(cell.min_comparison_eig);
        r.worst_B = std::min(r.worst_B, cell.min_B);
        r.worst_comparison_eig = std::min(r.worst_comparison_eig, cell.min_comparison_eig);
    }
    r.B_ok = r.worst_B >= -kAdmissibilityBTolerance;
    r.comparison_ok = r.worst_comparison_eig >= -kComparisonEigTolerance;
    return r;
}

/// Largest entrywise gap between S^F(gamma_t o phi), computed from the
/// finite-difference differential of the composed map, and c(u) S^F(phi) for a
/// candidate factor c. Used to tell which power of alpha relates the two.
inline double composed_stress_gap(const SmoothMap& map, const FProfile& profile, const ConformalFlow& flow,
                                  const std::function<double(double u)>& factor)
{
    const MapFields base = compute_fields(map);
    const MapFields comp = compute_fields(compose_with_flow(map, flow));
    const StressField s0 = stress_field(base, profile);
    const StressField s1 = stress_field(comp, profile);
    double gap = 0.0;
    for (std::size_t i = 0; i < base.count; ++i) {
        const double alpha = conformal_factor(flow, base.point(i));
        const double c = factor(alpha * alpha);
        gap = std::max(gap, (s1.at(i) - c * s0.at(i)).cwiseAbs().maxCoeff());
    }
    return gap;
}

} // namespace fharm
