#include "fharm/fharm.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <unistd.h>

using namespace fharm;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << " [violated: " << what << "]";
        }
    }
};

struct Built {
    Scenario scenario;
    std::shared_ptr<const DomainManifold> domain;
    SmoothMap map;
};

Built build(const std::string& name)
{
    Scenario s = catalog_scenario(name);
    auto d = build_domain(s);
    SmoothMap m = build_map(s, d);
    return {std::move(s), std::move(d), std::move(m)};
}

Lab lab_for(const std::string& name)
{
    Built b = build(name);
    return Lab(b.map, make_profile(b.scenario.profile_name, b.scenario.profile_parameter));
}

std::vector<Point> signed_directions(const Scenario& s)
{
    std::vector<Point> out;
    for (const Point& v : s.directions()) {
        const Point u = v / v.norm();
        out.push_back(u);
        out.push_back(-u);
    }
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

const std::vector<std::string> kCatalogMaps{"identity-s2-p2", "identity-s3-p2", "equator-s3-s4-p2", "clifford-t2-s3-p2",
                                            "constant-s2-p2"};

// ---------------------------------------------------------------------------

void criterion1(Outcome& o)
{
    const std::string name = "equator-s3-s4-p2";
    const auto out_dir = std::filesystem::temp_directory_path() / ("fharm_acceptance_" + std::to_string(::getpid()));
    const auto start = std::chrono::steady_clock::now();
    const RunResult run = run_scenario(catalog_scenario(name), out_dir / name);
    const double runtime = seconds_since(start);
    std::filesystem::remove_all(out_dir);

    const Lab lab = lab_for(name);
    const Scenario s = catalog_scenario(name);
    const double sup = lab.tension().sup_norm;
    const double smin = stress_field(lab.fields(), lab.profile()).global_min;
    const double e0 = lab.energy();
    double margin = std::numeric_limits<double>::infinity();
    std::size_t sweeps = 0;
    for (const Point& u : signed_directions(s)) {
        const SweepResult sw = energy_sweep(lab, u, s.t_grid);
        for (const SweepRow& r : sw.rows)
            if (r.t > 0.0)
                margin = std::min(margin, e0 - r.energy);
        ++sweeps;
    }
    o.detail << "sup|tau|=" << sup << " S^o=" << format_double(smin) << " E(0)=" << format_double(e0)
             << " min margin=" << margin << " over " << sweeps << " signed directions, run " << runtime << " s ("
             << thread_count() << " threads), scenario " << (run.all_pass() ? "PASS" : "FAIL");
    o.require(sup < 1e-4, "tension sup < 1e-4");
    o.require(std::abs(smin - 0.5) <= 1e-6, "S^o = 0.5 +- 1e-6");
    o.require(std::abs(e0 - 3 * kPi * kPi) <= 1e-7, "E(0) = 3 pi^2");
    o.require(s.directions().size() == 8, "8 seeded directions");
    o.require(margin > 1e-3, "margin > 1e-3");
    o.require(runtime < 60.0, "runtime < 60 s");
    o.require(run.all_pass() && run.outcome == TheoremOutcome::Verified, "scenario verdict THEOREM-VERIFIED");
}

void criterion2(Outcome& o)
{
    const std::string name = "identity-s2-p2";
    const Lab lab = lab_for(name);
    const Scenario s = catalog_scenario(name);
    double worst = 0.0;
    for (const Point& u : signed_directions(s))
        for (const SweepRow& r : energy_sweep(lab, u, s.t_grid).rows)
            worst = std::max(worst, std::abs(r.energy - 4 * kPi));
    const double smin = stress_field(lab.fields(), lab.profile()).global_min;
    o.detail << "max|E(t)-4pi|=" << worst << " (bound " << 1e-6 * 4 * kPi << ") S^o=" << smin;
    o.require(worst <= 1e-6 * 4 * kPi, "|E(t) - 4 pi| <= 1e-6 * 4 pi");
    o.require(std::abs(smin) <= 1e-8, "S^o = 0 +- 1e-8");
}

void criterion3(Outcome& o)
{
    const std::string name = "identity-s2-p4-negative-control";
    const Lab lab = lab_for(name);
    const Scenario s = catalog_scenario(name);
    const TheoremReport rep = verify_theorem(lab, s.directions(), s.t_grid);
    const auto out_dir = std::filesystem::temp_directory_path() / ("fharm_acceptance_nc_" + std::to_string(::getpid()));
    const RunResult run = run_scenario(s, out_dir);
    std::filesystem::remove_all(out_dir);
    const bool stress_failed = std::find(rep.failed.begin(), rep.failed.end(), "stress-positive") != rep.failed.end();
    o.detail << "outcome " << to_string(rep.outcome) << " S^o=" << format_double(rep.stress_min)
             << " inequality holds: " << (rep.inequality_holds ? "yes" : "no") << ", scenario exit code "
             << run.exit_code();
    o.require(rep.outcome == TheoremOutcome::HypothesesFail && stress_failed, "HYPOTHESES-FAIL(stress-positive)");
    o.require(std::abs(rep.stress_min + 2.0) <= 1e-6, "S^o = -2 +- 1e-6");
    o.require(run.exit_code() == 0, "scenario expectation met");
}

void criterion4(Outcome& o)
{
    const std::vector<FProfile> profiles{make_power(2), make_power(4), make_exp_type(1.0), make_sacks_uhlenbeck(0.5)};
    double worst_fv = 0.0;
    double worst_fd = 0.0;
    int cases = 0;
    for (const std::string& name : kCatalogMaps) {
        const Built b = build(name);
        for (const FProfile& f : profiles) {
            const Lab lab(b.map, f);
            if (!lab.f_harmonic()) {
                o.require(false, b.map.name() + " is not F-harmonic for " + f.label);
                continue;
            }
            const double scale = 1.0 + std::abs(lab.energy());
            for (const Point& u : b.scenario.directions()) {
                const double fv = first_variation(lab.map(), lab.fields(), lab.tension(), u / u.norm());
                const double fd = fd_derivative_oracle(lab, u, 0.0);
                worst_fv = std::max(worst_fv, std::abs(fv) / scale);
                worst_fd = std::max(worst_fd, std::abs(fd) / scale);
                ++cases;
            }
        }
    }
    o.detail << cases << " (map, profile, direction) cases; max |first_variation|/(1+E)=" << worst_fv
             << " max |fd(0)|/(1+E)=" << worst_fd;
    o.require(worst_fv <= 1e-5, "|first_variation| <= 1e-5 (1 + E)");
    o.require(worst_fd <= 1e-5, "|fd(0)| <= 1e-5 (1 + E)");
}

void criterion5(Outcome& o)
{
    const std::string name = "equator-s3-s4-p2";
    const Lab lab = lab_for(name);
    const Scenario s = catalog_scenario(name);
    std::set<std::string> named;
    bool all_one = true;
    double worst_rel = 0.0;
    for (const Point& u : s.directions()) {
        const Lemma2Adjudication a = adjudicate_lemma2(lab, lab.direction(u), 0.5);
        all_one = all_one && a.exactly_one();
        named.insert(a.matched());
        const double matched = a.proof_matches ? a.proof : a.statement;
        worst_rel = std::max(worst_rel, std::abs(matched - a.fd) / (1.0 + std::abs(a.fd)));
    }
    const Lemma2Adjudication first = adjudicate_lemma2(lab, lab.direction(s.directions()[0]), 0.5);
    o.detail << "matching variant: " << (named.size() == 1 ? *named.begin() : std::string("inconsistent"))
             << " (direction 0: statement " << format_double(first.statement) << ", proof "
             << format_double(first.proof) << ", fd " << format_double(first.fd) << "), max rel. gap " << worst_rel;
    o.require(all_one, "exactly one variant matches for every direction");
    o.require(named.size() == 1, "the same variant matches for every direction");
}

void criterion6(Outcome& o)
{
    const std::vector<double> t0s{0.25, 0.5, 1.0, 1.5};
    double worst = 0.0;
    double worst_chi = -std::numeric_limits<double>::infinity();
    double worst_phi = -std::numeric_limits<double>::infinity();
    int scenarios = 0;
    int chi_cases = 0;
    int phi_cases = 0;
    for (const CatalogEntry& e : builtin_catalog()) {
        const Scenario s = catalog_scenario(e.name);
        if (s.expect != TheoremOutcome::Verified)
            continue;
        ++scenarios;
        const Lab lab = lab_for(e.name);
        bool admissible = true;
        for (const Point& u : signed_directions(s))
            admissible = admissible
                         && check_tensor_comparison(lab.domain(), lab.fields(), lab.profile(), u, s.t_grid).admissible();
        for (const Point& u : signed_directions(s)) {
            const DirectionalFields dir = lab.direction(u);
            const bool half_sphere = *std::min_element(dir.height.begin(), dir.height.end()) >= 0.0;
            for (double t0 : t0s) {
                const CellTerms c = compute_cell(lab, dir, t0);
                const double fd = fd_derivative_oracle(lab, u, t0);
                const double res = std::abs(c.phi + c.chi - fd) / (1.0 + std::abs(fd));
                if (res > worst)
                    worst = res;
                if (res > 1e-4)
                    o.require(false, e.name + " residual at t0=" + format_double(t0));
                if (admissible && half_sphere) {
                    worst_chi = std::max(worst_chi, c.chi);
                    ++chi_cases;
                    if (c.chi > 1e-10)
                        o.require(false, e.name + " chi <= 1e-10 at t0=" + format_double(t0));
                }
                if (c.min_stress_eig >= -1e-10) {
                    worst_phi = std::max(worst_phi, c.phi);
                    ++phi_cases;
                    if (c.phi > 1e-10)
                        o.require(false, e.name + " Phi <= 1e-10 at t0=" + format_double(t0));
                }
            }
        }
    }
    o.detail << scenarios << " THEOREM-VERIFIED scenarios; max |Phi+chi-fd|/(1+|fd|)=" << worst << "; max chi "
             << worst_chi << " over " << chi_cases << " half-sphere cases; max Phi " << worst_phi << " over "
             << phi_cases << " PSD cases";
}

void criterion7(Outcome& o)
{
    double power_max_abs_B = 0.0;
    double half_min_B = std::numeric_limits<double>::infinity();
    double min_comparison = std::numeric_limits<double>::infinity();
    int power = 0;
    int half = 0;
    for (const CatalogEntry& e : builtin_catalog()) {
        const Scenario s = catalog_scenario(e.name);
        const bool is_power = s.profile_name == "power";
        const bool explicit_dirs = !s.random_directions;
        if (!is_power && !explicit_dirs)
            continue;
        const Lab lab = lab_for(e.name);
        bool all_half = true;
        for (const Point& u : signed_directions(s)) {
            const std::vector<double> h = heights_of(lab.fields(), u);
            if (*std::min_element(h.begin(), h.end()) < 0.0) {
                all_half = false;
                if (!is_power)
                    continue;
            }
            const AdmissibilityReport r = check_tensor_comparison(lab.domain(), lab.fields(), lab.profile(), u, s.t_grid);
            if (is_power)
                power_max_abs_B = std::max(power_max_abs_B, *std::max_element(r.max_abs_B.begin(), r.max_abs_B.end()));
            else
                half_min_B = std::min(half_min_B, r.worst_B);
            min_comparison = std::min(min_comparison, r.worst_comparison_eig);
        }
        if (is_power)
            ++power;
        else if (all_half || explicit_dirs)
            ++half;
    }
    o.detail << power << " power scenarios: max|B|=" << power_max_abs_B << "; " << half
             << " exp/SU half-sphere scenarios: min B=" << half_min_B << "; min comparison eigenvalue "
             << min_comparison;
    o.require(power_max_abs_B <= 1e-12, "power max|B| <= 1e-12");
    o.require(half_min_B >= -1e-12, "half-sphere min B >= -1e-12");
    o.require(min_comparison >= -1e-10, "comparison eigenvalue >= -1e-10");
    o.require(half >= 2, "exp-type and SU half-sphere scenarios present");
}

void criterion8(Outcome& o)
{
    std::mt19937_64 rng(kDefaultSeed);
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> T(-2.0, 2.0);
    auto unit = [&](int dim) {
        Point p(dim);
        for (int k = 0; k < dim; ++k)
            p(k) = N(rng);
        return Point(p / p.norm());
    };
    double ode = 0.0;
    double group = 0.0;
    double cocycle = 0.0;
    for (int k = 0; k < 100; ++k) {
        const int dim = 3 + k % 4;
        const Point u = unit(dim);
        const Point y = unit(dim);
        const double t = T(rng);
        const double s = T(rng);
        const ConformalFlow ft(u, t);
        const ConformalFlow fs(u, s);
        const ConformalFlow fst(u, s + t);
        ode = std::max(ode, (flow_apply(ft, y) - flow_ode_oracle(ft, y, 4000)).norm());
        group = std::max(group, (flow_apply(fs, flow_apply(ft, y)) - flow_apply(fst, y)).norm());
        group = std::max(group, (flow_apply(ft.reversed(), flow_apply(ft, y)) - y).norm());
        const double lhs = conformal_factor(fst, y);
        const double rhs = conformal_factor(fs, flow_apply(ft, y)) * conformal_factor(ft, y);
        cocycle = std::max(cocycle, std::abs(lhs - rhs) / std::abs(lhs));
    }
    o.detail << "100 random cases: max |flow - ODE|=" << ode << ", group law " << group << ", cocycle (rel.) "
             << cocycle;
    o.require(ode < 1e-8, "flow vs ODE < 1e-8");
    o.require(group <= 1e-10, "group law within 1e-10");
    o.require(cocycle <= 1e-10, "cocycle within 1e-10");
}

void criterion9(Outcome& o)
{
    double worst = 0.0;
    std::size_t nodes = 0;
    for (const std::string& name : kCatalogMaps) {
        const Built b = build(name);
        const MapFields base = compute_fields(b.map, FieldOptions{false});
        const auto dirs = b.scenario.directions();
        for (std::size_t k = 0; k < std::min<std::size_t>(2, dirs.size()); ++k)
            for (double t : {0.5, 1.0}) {
                const ConformalFlow flow(dirs[k], t);
                const MapFields comp = compute_fields(compose_with_flow(b.map, flow), FieldOptions{false});
                for (std::size_t i = 0; i < base.count; ++i) {
                    const double a = conformal_factor(flow, base.point(i));
                    const double expect = a * a * 2.0 * base.density[i];
                    const double got = 2.0 * comp.density[i];
                    const double rel = expect > 0.0 ? std::abs(got - expect) / expect : std::abs(got);
                    worst = std::max(worst, rel);
                }
                nodes += base.count;
            }
    }
    o.detail << nodes << " node evaluations over " << kCatalogMaps.size()
             << " catalog maps, t in {0.5, 1}: max relative error " << worst;
    o.require(worst <= 1e-5, "pullback identity within 1e-5 relative");
}

void criterion10(Outcome& o)
{
    auto rel_volume = [](const DomainManifold& d) {
        return std::abs(integrate(d, std::vector<double>(d.node_count(), 1.0)) / d.analytic_volume() - 1.0);
    };
    const double v2 = rel_volume(build_sphere_domain(2, default_resolution(DomainKind::Sphere, 2)));
    const double v3 = rel_volume(build_sphere_domain(3, default_resolution(DomainKind::Sphere, 3)));
    const double P = 2.0 * kPi;
    const double vt = rel_volume(build_torus_domain(2, {P, P}, default_resolution(DomainKind::FlatTorus, 2)));

    const Scenario s = catalog_scenario("equator-s3-s4-p2");
    const FProfile f = make_profile(s.profile_name, s.profile_parameter);
    auto energies = [&](int res) {
        Scenario r = s;
        r.resolution = res;
        const auto d = build_domain(r);
        const MapFields fields = compute_fields(build_map(r, d), FieldOptions{false});
        std::vector<double> out;
        for (const Point& u : signed_directions(s)) {
            const std::vector<double> h = heights_of(fields, u);
            for (double t : s.t_grid)
                out.push_back(composed_energy_fast(*d, fields, h, f, t));
        }
        return out;
    };
    const int base_res = s.resolution;
    const std::vector<double> coarse = energies(base_res);
    const std::vector<double> fine = energies(2 * base_res);
    double doubling = 0.0;
    for (std::size_t k = 0; k < coarse.size(); ++k)
        doubling = std::max(doubling, std::abs(fine[k] - coarse[k]) / std::abs(coarse[k]));
    o.detail << "volume rel. errors S^2 " << v2 << ", S^3 " << v3 << ", T^2 " << vt << "; resolution " << base_res
             << " -> " << 2 * base_res << " changes E(t) by " << doubling << " relative over " << coarse.size()
             << " values";
    o.require(std::max({v2, v3, vt}) <= 1e-8, "volumes within 1e-8");
    o.require(doubling < 1e-7, "doubling change < 1e-7");
}

} // namespace

int main()
{
    const std::vector<std::pair<int, std::function<void(Outcome&)>>> criteria{
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
        {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}};
    int failures = 0;
    for (const auto& [id, fn] : criteria) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            fn(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        if (!o.pass)
            ++failures;
        std::printf("Criterion %d: %s (%.1f s) %s\n", id, o.pass ? "PASS" : "FAIL", seconds_since(start),
                    o.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
