#pragma once

#include "fharm/admissibility.hpp"
#include "fharm/functionals.hpp"

#include <memory>
#include <mutex>
#include <optional>
#include <sstream>

namespace fharm {

inline constexpr double kHarmonicThreshold = 1e-4;
inline constexpr double kStressTolerance = 1e-10;
inline constexpr double kDefaultFdStep = 1e-4;

/// A map, a profile and the map's per-node fields. The F-tension is computed on
/// first use and cached.
class Lab {
public:
    Lab(SmoothMap map, FProfile profile, FieldOptions options = {})
        : map_(std::move(map))
        , profile_(std::move(profile))
        , fields_(compute_fields(map_, options))
        , cache_(std::make_shared<Cache>())
    {
        derivs_.resize(fields_.count);
        for (std::size_t i = 0; i < fields_.count; ++i)
            derivs_[i] = {profile_.first(fields_.density[i]), profile_.second(fields_.density[i])};
    }

    const SmoothMap& map() const { return map_; }
    const FProfile& profile() const { return profile_; }
    const MapFields& fields() const { return fields_; }
    const DomainManifold& domain() const { return map_.domain(); }

    /// F'(e), F''(e) per node.
    std::pair<double, double> base_derivatives(std::size_t i) const { return derivs_[i]; }

    const TensionField& tension() const
    {
        std::lock_guard lock(cache_->mutex);
        if (!cache_->tension)
            cache_->tension = f_tension(map_, profile_);
        return *cache_->tension;
    }

    bool f_harmonic(double threshold = kHarmonicThreshold) const { return tension().sup_norm < threshold; }

    /// Direction data for v / |v|; derivative formulas assume |v| = 1.
    DirectionalFields direction(const Point& v) const
    {
        const double n = v.norm();
        if (!(n > 0.0))
            throw ConfigError("direction must be nonzero");
        return directional_fields(fields_, Point(v / n));
    }

    double energy() const { return f_energy(domain(), fields_, profile_); }

    void require_harmonic(const char* what) const
    {
        if (!f_harmonic()) {
            std::ostringstream os;
            os << what << ": map '" << map_.name() << "' is not F-harmonic for " << profile_.label
               << " (sup|tau_F| = " << tension().sup_norm << ")";
            throw PreconditionError(os.str());
        }
    }

private:
    struct Cache {
        std::mutex mutex;
        std::optional<TensionField> tension;
    };

    SmoothMap map_;
    FProfile profile_;
    MapFields fields_;
    std::vector<std::pair<double, double>> derivs_;
    std::shared_ptr<Cache> cache_;
};

/// All quadratures needed at one (direction, t) cell. Integrals are over M.
struct CellTerms {
    double energy = 0.0;
    double energy_plus = 0.0;  ///< at t + step
    double energy_minus = 0.0; ///< at t - step
    double fd_derivative = 0.0;
    /// int alpha^3 F'(alpha^2 e) K dv for K = 2e|vbar|^2 - |d phi_v|^2 (statement)
    /// and K = e|vbar|^2 - |d phi_v|^2 (proof)
    double k_statement = 0.0;
    double k_proof = 0.0;
    double g_first = 0.0;  ///< int alpha^3 F''(alpha^2 e) |d phi|^2 <d phi(grad alpha), vbar> dv
    double g_second = 0.0; ///< int alpha^2 (F''(x) alpha^2 - F'(x)/F'(e) F''(e)) phi_v |d phi|^2 dv
    double phi = 0.0;
    double chi = 0.0;
    double min_B = 0.0;
    double min_stress_eig = 0.0; ///< of S^F(gamma_t o phi)
};

inline CellTerms compute_cell(const Lab& lab, const DirectionalFields& dir, double t, double step = kDefaultFdStep)
{
    const MapFields& f = lab.fields();
    const FProfile& F = lab.profile();
    const double ch = std::cosh(t);
    const double sh = std::sinh(t);
    const double chp = std::cosh(t + step);
    const double shp = std::sinh(t + step);
    const double chm = std::cosh(t - step);
    const double shm = std::sinh(t - step);

    enum { kE, kEp, kEm, kKs, kKp, kG1, kG2, kPhi, kCount };
    const auto red = integrate_fused<kCount, 2>(
        lab.domain(), [&](std::size_t i, std::array<double, kCount>& out, std::array<double, 2>& mins) {
            const double e = f.density[i];
            const double h = dir.height[i];
            const double gh = dir.grad_height_sq[i];
            const double vb = dir.vbar_sq[i];
            const auto [d1e, d2e] = lab.base_derivatives(i);

            const double alpha = 1.0 / (ch + h * sh);
            const double u = alpha * alpha;
            const double a3 = u * alpha;
            const double x = u * e;
            const double d1x = F.first(x);
            const double d2x = F.second(x);

            const double ap = 1.0 / (chp + h * shp);
            const double am = 1.0 / (chm + h * shm);
            out[kE] = F.value(x);
            out[kEp] = F.value(ap * ap * e);
            out[kEm] = F.value(am * am * e);

            out[kKs] = a3 * d1x * (2.0 * e * vb - gh);
            out[kKp] = a3 * d1x * (e * vb - gh);
            // <d phi(grad(alpha o phi)), vbar o phi> = -sinh t alpha^2 |d phi_v|^2
            out[kG1] = a3 * d2x * (2.0 * e) * (-sh * u * gh);
            const double ratio = d1e != 0.0 ? d1x / d1e * d2e : 0.0;
            out[kG2] = u * (d2x * u - ratio) * h * (2.0 * e);
            out[kPhi] = a3 * ((d1x + x * d2x) * gh - d1x * e * vb);

            mins[0] = admissibility_B(F, e, u, h);
            mins[1] = composed_stress_coefficients(F, e, u).min_eigenvalue(f.pullback_min[i], f.pullback_max[i]);
        });

    CellTerms c;
    c.energy = red.integrals[kE];
    c.energy_plus = red.integrals[kEp];
    c.energy_minus = red.integrals[kEm];
    c.fd_derivative = (c.energy_plus - c.energy_minus) / (2.0 * step);
    c.k_statement = red.integrals[kKs];
    c.k_proof = red.integrals[kKp];
    c.g_first = red.integrals[kG1];
    c.g_second = red.integrals[kG2];
    c.phi = 2.0 * sh * red.integrals[kPhi];
    c.chi = -c.g_second;
    c.min_B = red.minima[0];
    c.min_stress_eig = red.minima[1];
    return c;
}

enum class Lemma2Variant {
    Statement, ///< (|d phi|^2 |vbar o phi|^2 - |d phi_v|^2)
    Proof,     ///< (|d phi|^2/2 |vbar o phi|^2 - |d phi_v|^2)
};

inline const char* to_string(Lemma2Variant v)
{
    return v == Lemma2Variant::Statement ? "statement" : "proof";
}

/// g(t) expanded into its two integrals; the gradient of alpha o phi is
/// replaced by its closed form so no numerical gradient of f_t is taken.
inline double lemma3_g(const Lab& lab, const DirectionalFields& dir, double t0)
{
    lab.require_harmonic("lemma3_g");
    const CellTerms c = compute_cell(lab, dir, t0);
    return c.g_first + c.g_second;
}

/// Right-hand side of the derivative formula for d/dt E_F(gamma_t o phi) at t0.
inline double lemma2_rhs(const Lab& lab, const DirectionalFields& dir, double t0, Lemma2Variant variant)
{
    lab.require_harmonic("lemma2_rhs");
    const CellTerms c = compute_cell(lab, dir, t0);
    const double k = variant == Lemma2Variant::Statement ? c.k_statement : c.k_proof;
    return -2.0 * std::sinh(t0) * k - (c.g_first + c.g_second);
}

/// Central difference of the conformal-factor energy at t0.
inline double fd_derivative_oracle(const Lab& lab, const Point& u, double t0, double step = kDefaultFdStep)
{
    if (!(step > 0.0))
        throw ContractViolation("fd_derivative_oracle: step must be positive");
    const Point unit = u / u.norm();
    const std::vector<double> h = heights_of(lab.fields(), unit);
    const double ep = composed_energy_fast(lab.domain(), lab.fields(), h, lab.profile(), t0 + step);
    const double em = composed_energy_fast(lab.domain(), lab.fields(), h, lab.profile(), t0 - step);
    return (ep - em) / (2.0 * step);
}

struct Decomposition {
    double phi = 0.0;
    double chi = 0.0;
    double fd = 0.0;
    double residual() const { return std::abs(phi + chi - fd); }
    bool consistent() const { return residual() <= 1e-4 * (1.0 + std::abs(fd)); }
};

/// (Phi(t0), chi(t0)) by quadrature of their integrands, with the FD derivative for comparison.
inline Decomposition phi_chi_decomposition(const Lab& lab, const DirectionalFields& dir, double t0)
{
    lab.require_harmonic("phi_chi_decomposition");
    const CellTerms c = compute_cell(lab, dir, t0);
    return {c.phi, c.chi, c.fd_derivative};
}

struct Lemma2Adjudication {
    double statement = 0.0;
    double proof = 0.0;
    double fd = 0.0;
    bool statement_matches = false;
    bool proof_matches = false;

    bool exactly_one() const { return statement_matches != proof_matches; }
    std::string matched() const
    {
        if (statement_matches && proof_matches)
            return "both";
        if (statement_matches)
            return "statement";
        if (proof_matches)
            return "proof";
        return "none";
    }
};

/// Evaluates both variants against the FD derivative at t0, tolerance 1e-4 (1 + |fd|).
inline Lemma2Adjudication adjudicate_lemma2(const Lab& lab, const DirectionalFields& dir, double t0)
{
    lab.require_harmonic("adjudicate_lemma2");
    const CellTerms c = compute_cell(lab, dir, t0);
    Lemma2Adjudication a;
    const double g = c.g_first + c.g_second;
    a.statement = -2.0 * std::sinh(t0) * c.k_statement - g;
    a.proof = -2.0 * std::sinh(t0) * c.k_proof - g;
    a.fd = c.fd_derivative;
    const double tol = 1e-4 * (1.0 + std::abs(a.fd));
    a.statement_matches = std::abs(a.statement - a.fd) <= tol;
    a.proof_matches = std::abs(a.proof - a.fd) <= tol;
    return a;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepOptions {
    bool require_harmonic = false;
    double fd_step = kDefaultFdStep;
    /// Also evaluate E(t) from finite differences of the composed map at every t.
    bool composed_cross_check = false;
};

struct SweepRow {
    double t = 0.0;
    double energy = 0.0;
    double dE_fd = 0.0;
    double lemma2_statement = 0.0;
    double lemma2_proof = 0.0;
    double phi = 0.0;
    double chi = 0.0;
    double min_B = 0.0;
    double min_stress_eig = 0.0;
    bool within = true; ///< E(t) <= E(0) + tol
    std::optional<double> composed_direct;
};

struct SweepResult {
    Point direction;
    std::vector<SweepRow> rows;
    double e0 = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    double max_excess = 0.0;    ///< max_t E(t) - E(0)
    double min_margin = 0.0;    ///< min over t > 0 of E(0) - E(t)
    double max_decomposition_residual = 0.0;
    double max_composed_discrepancy = 0.0;
};

inline void validate_grid(std::span<const double> grid)
{
    if (grid.empty())
        throw ConfigError("time grid is empty");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!(grid[k] >= 0.0) || !std::isfinite(grid[k]))
            throw ConfigError("time grid must be finite and nonnegative (reverse the direction for t < 0)");
        if (k > 0 && !(grid[k] > grid[k - 1]))
            throw ConfigError("time grid must be strictly increasing");
    }
}

/// One row of a sweep at an arbitrary t (negative t allowed here).
inline SweepRow sweep_row(const Lab& lab, const DirectionalFields& dir, double t, double step = kDefaultFdStep)
{
    const CellTerms c = compute_cell(lab, dir, t, step);
    SweepRow r;
    r.t = t;
    r.energy = c.energy;
    r.dE_fd = c.fd_derivative;
    const double g = c.g_first + c.g_second;
    r.lemma2_statement = -2.0 * std::sinh(t) * c.k_statement - g;
    r.lemma2_proof = -2.0 * std::sinh(t) * c.k_proof - g;
    r.phi = c.phi;
    r.chi = c.chi;
    r.min_B = c.min_B;
    r.min_stress_eig = c.min_stress_eig;
    return r;
}

/// E(t) = E_F(gamma_t o phi) and the derivative diagnostics over a grid t >= 0.
inline SweepResult energy_sweep(const Lab& lab, const Point& v, std::span<const double> grid, SweepOptions options = {})
{
    validate_grid(grid);
    if (options.require_harmonic)
        lab.require_harmonic("energy_sweep");
    const DirectionalFields dir = lab.direction(v);
    SweepResult res;
    res.direction = dir.direction;
    res.e0 = lab.energy();
    res.tolerance = 1e-7 * (1.0 + std::abs(res.e0));
    res.min_margin = std::numeric_limits<double>::infinity();
    for (double t : grid) {
        SweepRow row = sweep_row(lab, dir, t, options.fd_step);
        row.within = row.energy <= res.e0 + res.tolerance;
        res.pass = res.pass && row.within;
        res.max_excess = std::max(res.max_excess, row.energy - res.e0);
        if (t > 0.0)
            res.min_margin = std::min(res.min_margin, res.e0 - row.energy);
        res.max_decomposition_residual
            = std::max(res.max_decomposition_residual, std::abs(row.phi + row.chi - row.dE_fd) / (1.0 + std::abs(row.dE_fd)));
        if (options.composed_cross_check) {
            const ConformalFlow flow(dir.direction, t);
            const double direct
                = f_energy(lab.domain(), compute_fields(compose_with_flow(lab.map(), flow), FieldOptions{false}), lab.profile());
            row.composed_direct = direct;
            res.max_composed_discrepancy
                = std::max(res.max_composed_discrepancy, std::abs(direct - row.energy) / (1.0 + std::abs(row.energy)));
        }
        res.rows.push_back(row);
    }
    if (res.min_margin == std::numeric_limits<double>::infinity())
        res.min_margin = 0.0;
    return res;
}

// ---------------------------------------------------------------------------
// Theorem pipeline

enum class TheoremOutcome { Verified, HypothesesFail, CounterexampleFlag };

inline const char* to_string(TheoremOutcome o)
{
    switch (o) {
    case TheoremOutcome::Verified:
        return "THEOREM-VERIFIED";
    case TheoremOutcome::HypothesesFail:
        return "HYPOTHESES-FAIL";
    case TheoremOutcome::CounterexampleFlag:
        return "COUNTEREXAMPLE-FLAG";
    }
    return "?";
}

struct TheoremReport {
    double tension_sup = 0.0;
    bool harmonic = false;
    double stress_min = 0.0; ///< S^{o,F} over nodes
    bool stress_ok = false;
    bool strict = false;
    std::vector<AdmissibilityReport> admissibility; ///< one per signed direction
    bool admissible = true;
    std::vector<SweepResult> sweeps; ///< +u and -u for every direction, interleaved
    bool inequality_holds = true;
    double min_margin = std::numeric_limits<double>::infinity();
    double max_decomposition_residual = 0.0;
    std::vector<std::string> failed;
    TheoremOutcome outcome = TheoremOutcome::HypothesesFail;
};

/// Certifies each hypothesis (F-harmonic, positive stress, admissible profile),
/// then sweeps E(t) for +u and -u along every direction.
inline TheoremReport verify_theorem(const Lab& lab, const std::vector<Point>& directions, std::span<const double> grid,
                                    SweepOptions options = {})
{
    validate_grid(grid);
    TheoremReport rep;
    rep.tension_sup = lab.tension().sup_norm;
    rep.harmonic = rep.tension_sup < kHarmonicThreshold;
    if (!rep.harmonic)
        rep.failed.push_back("F-harmonic");

    const StressField stress = stress_field(lab.fields(), lab.profile());
    rep.stress_min = stress.global_min;
    rep.stress_ok = rep.stress_min >= -kStressTolerance;
    rep.strict = rep.stress_min > kStressTolerance;
    if (!rep.stress_ok)
        rep.failed.push_back("stress-positive");

    options.require_harmonic = false;
    for (const Point& v : directions) {
        const Point u = v / v.norm();
        for (const Point& signed_u : {u, Point(-u)}) {
            AdmissibilityReport adm = check_tensor_comparison(lab.domain(), lab.fields(), lab.profile(), signed_u, grid);
            rep.admissible = rep.admissible && adm.admissible();
            rep.admissibility.push_back(std::move(adm));
            SweepResult sw = energy_sweep(lab, signed_u, grid, options);
            rep.inequality_holds = rep.inequality_holds && sw.pass;
            rep.min_margin = std::min(rep.min_margin, sw.min_margin);
            rep.max_decomposition_residual = std::max(rep.max_decomposition_residual, sw.max_decomposition_residual);
            rep.sweeps.push_back(std::move(sw));
            options.composed_cross_check = false; // first signed direction only
        }
    }
    if (!rep.admissible)
        rep.failed.push_back("admissible");

    if (!rep.failed.empty())
        rep.outcome = TheoremOutcome::HypothesesFail;
    else if (rep.inequality_holds)
        rep.outcome = TheoremOutcome::Verified;
    else
        rep.outcome = TheoremOutcome::CounterexampleFlag;
    return rep;
}

} // namespace fharm
