#pragma once

#include "fharm/report.hpp"
#include "fharm/variation.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <set>

namespace fharm {

inline constexpr std::uint64_t kDefaultSeed = 20240607;
inline constexpr int kDefaultDirectionCount = 8;

/// Grid resolution when a config does not set one; the same for every domain.
inline int default_resolution(DomainKind, int)
{
    return 64;
}

inline std::vector<double> default_time_grid()
{
    std::vector<double> g;
    for (int k = 0; k <= 20; ++k)
        g.push_back(0.1 * k);
    return g;
}

/// A fully parsed scenario. Everything is validated at parse time so that a
/// run only fails on verdicts, never on configuration.
struct Scenario {
    std::string name;
    DomainKind domain_kind = DomainKind::Sphere;
    int domain_dim = 2;
    int resolution = 0;
    std::vector<double> periods;

    std::string map_name;
    int target_dim = 0;
    Point map_value;

    std::string profile_name;
    double profile_parameter = 0.0;

    bool random_directions = true;
    int direction_count = kDefaultDirectionCount;
    std::uint64_t seed = kDefaultSeed;
    std::vector<Point> explicit_directions;

    std::vector<double> t_grid = default_time_grid();
    std::set<std::string> checks;
    TheoremOutcome expect = TheoremOutcome::Verified;
    std::set<std::string> expect_failed;
    std::optional<double> expect_energy;
    double energy_tolerance = 1e-7;
    double lemma2_t0 = 0.5;
    std::vector<double> decomposition_t0 = {0.25, 0.5, 1.0, 1.5};
    std::string output_dir;

    std::vector<Point> directions() const
    {
        return random_directions ? random_unit_directions(target_dim + 1, direction_count, seed) : explicit_directions;
    }

    bool has(const std::string& check) const { return checks.count(check) > 0; }
};

inline const std::vector<std::string>& known_checks()
{
    static const std::vector<std::string> k = {"energy",  "stress",        "admissibility", "sweep",
                                               "lemma2",  "decomposition", "theorem"};
    return k;
}

inline const std::vector<std::string>& hypothesis_names()
{
    static const std::vector<std::string> k = {"F-harmonic", "stress-positive", "admissible"};
    return k;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

class LineError {
public:
    LineError(std::string source, int line) : source_(std::move(source)), line_(line) {}
    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ConfigError(source_ + ":" + std::to_string(line_) + ": " + msg);
    }

private:
    std::string source_;
    int line_;
};

inline double parse_number(const std::string& s, const LineError& at)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        at.fail("expected a number, got '" + s + "'");
    return v;
}

inline long long parse_integer(const std::string& s, const LineError& at)
{
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        at.fail("expected an integer, got '" + s + "'");
    return v;
}

inline std::vector<double> parse_numbers(const std::string& s, const LineError& at)
{
    std::vector<double> out;
    for (const auto& tok : split(s, ','))
        out.push_back(parse_number(tok, at));
    return out;
}

inline Point to_point(const std::vector<double>& v)
{
    if (v.size() > static_cast<std::size_t>(kMaxAmbient))
        throw ConfigError("vector has more than " + std::to_string(kMaxAmbient) + " components");
    Point p(static_cast<int>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k)
        p(static_cast<int>(k)) = v[k];
    return p;
}

/// "start:stop:step" or a comma list.
inline std::vector<double> parse_grid(const std::string& s, const LineError& at)
{
    if (s.find(':') == std::string::npos)
        return parse_numbers(s, at);
    const auto parts = split(s, ':');
    if (parts.size() != 3)
        at.fail("time grid range must be start:stop:step");
    const double a = parse_number(parts[0], at);
    const double b = parse_number(parts[1], at);
    const double h = parse_number(parts[2], at);
    if (!(h > 0.0) || b < a)
        at.fail("time grid range needs step > 0 and stop >= start");
    const long long n = std::llround((b - a) / h);
    if (std::abs(a + n * h - b) > 1e-9 * (1.0 + std::abs(b)))
        at.fail("time grid step does not divide the range");
    if (n > 100000)
        at.fail("time grid has too many points");
    std::vector<double> g;
    for (long long k = 0; k <= n; ++k)
        g.push_back(a + static_cast<double>(k) * h);
    return g;
}

} // namespace detail

inline FProfile make_profile(const std::string& name, double parameter)
{
    if (name == "power")
        return make_power(parameter);
    if (name == "exp")
        return make_exp_type(parameter);
    if (name == "sacks-uhlenbeck")
        return make_sacks_uhlenbeck(parameter);
    throw ConfigError("unknown profile '" + name + "' (power, exp, sacks-uhlenbeck)");
}

inline std::optional<TheoremOutcome> parse_outcome(const std::string& s)
{
    for (TheoremOutcome o : {TheoremOutcome::Verified, TheoremOutcome::HypothesesFail, TheoremOutcome::CounterexampleFlag})
        if (s == to_string(o))
            return o;
    return std::nullopt;
}

/// Parses the key = value scenario format. '#' starts a comment. Errors carry
/// "source:line:" of the offending line (line 0 for missing keys).
inline Scenario parse_scenario(std::string_view text, const std::string& source = "config")
{
    using detail::LineError;
    std::map<std::string, std::pair<std::string, int>> kv;
    {
        std::istringstream is{std::string(text)};
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const LineError at(source, lineno);
            if (const auto hash = line.find('#'); hash != std::string::npos)
                line.resize(hash);
            const std::string body = detail::trim(line);
            if (body.empty())
                continue;
            const auto eq = body.find('=');
            if (eq == std::string::npos)
                at.fail("expected 'key = value'");
            const std::string key = detail::trim(body.substr(0, eq));
            const std::string value = detail::trim(body.substr(eq + 1));
            if (key.empty() || value.empty())
                at.fail("empty key or value");
            if (kv.count(key))
                at.fail("duplicate key '" + key + "' (first on line " + std::to_string(kv[key].second) + ")");
            kv[key] = {value, lineno};
        }
    }

    static const std::set<std::string> allowed = {
        "name",       "domain",         "dimension",        "resolution",      "periods",   "map",
        "target_dimension", "map_value", "profile",       "profile_parameter", "directions", "direction_count",
        "seed",       "t_grid",         "checks",           "expect",          "expect_failed", "expect_energy",
        "energy_tolerance", "lemma2_t0", "decomposition_t0", "output_dir"};
    for (const auto& [key, val] : kv)
        if (!allowed.count(key))
            LineError(source, val.second).fail("unknown key '" + key + "'");

    auto at = [&](const std::string& key) { return LineError(source, kv.count(key) ? kv[key].second : 0); };
    auto required = [&](const std::string& key) -> const std::string& {
        if (!kv.count(key))
            LineError(source, 0).fail("missing required key '" + key + "'");
        return kv[key].first;
    };
    auto optional = [&](const std::string& key) -> std::optional<std::string> {
        if (!kv.count(key))
            return std::nullopt;
        return kv[key].first;
    };

    Scenario s;
    s.name = required("name");
    for (char c : s.name)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.'))
            at("name").fail("name may contain only letters, digits, '-', '_' and '.'");

    const std::string& domain = required("domain");
    if (domain == "sphere")
        s.domain_kind = DomainKind::Sphere;
    else if (domain == "torus")
        s.domain_kind = DomainKind::FlatTorus;
    else
        at("domain").fail("domain must be 'sphere' or 'torus'");

    const long long dim = detail::parse_integer(required("dimension"), at("dimension"));
    if (s.domain_kind == DomainKind::Sphere && dim != 2 && dim != 3)
        at("dimension").fail("sphere domains support dimension 2 or 3");
    if (s.domain_kind == DomainKind::FlatTorus && (dim < 2 || dim > kMaxDomainDim))
        at("dimension").fail("torus domains need dimension 2.." + std::to_string(kMaxDomainDim));
    s.domain_dim = static_cast<int>(dim);

    s.resolution = default_resolution(s.domain_kind, s.domain_dim);
    if (auto r = optional("resolution")) {
        const long long res = detail::parse_integer(*r, at("resolution"));
        if (res < 8 || res > 512)
            at("resolution").fail("resolution must lie in [8, 512]");
        s.resolution = static_cast<int>(res);
    }
    if (auto p = optional("periods")) {
        if (s.domain_kind != DomainKind::FlatTorus)
            at("periods").fail("periods apply to torus domains only");
        s.periods = detail::parse_numbers(*p, at("periods"));
        if (static_cast<int>(s.periods.size()) != s.domain_dim)
            at("periods").fail("need one period per dimension");
        for (double x : s.periods)
            if (!(x > 0.0))
                at("periods").fail("periods must be positive");
    } else if (s.domain_kind == DomainKind::FlatTorus) {
        s.periods.assign(s.domain_dim, 2.0 * std::numbers::pi);
    }

    s.map_name = required("map");
    const auto target = optional("target_dimension");
    auto target_value = [&]() {
        const long long n = detail::parse_integer(*target, at("target_dimension"));
        if (n < 1 || n + 1 > kMaxAmbient)
            at("target_dimension").fail("target dimension must lie in [1, " + std::to_string(kMaxAmbient - 1) + "]");
        return static_cast<int>(n);
    };
    if (s.map_name == "identity") {
        if (s.domain_kind != DomainKind::Sphere)
            at("map").fail("identity map needs a sphere domain");
        s.target_dim = s.domain_dim;
        if (target && target_value() != s.domain_dim)
            at("target_dimension").fail("identity map: target dimension must equal the domain dimension");
    } else if (s.map_name == "equator") {
        if (s.domain_kind != DomainKind::Sphere)
            at("map").fail("equator map needs a sphere domain");
        if (!target)
            at("map").fail("equator map needs target_dimension");
        s.target_dim = target_value();
        if (s.target_dim <= s.domain_dim)
            at("target_dimension").fail("equator map: target dimension must exceed the domain dimension");
    } else if (s.map_name == "clifford") {
        if (s.domain_kind != DomainKind::FlatTorus || s.domain_dim != 2)
            at("map").fail("clifford map needs a 2-dimensional torus domain");
        if (s.periods[0] != s.periods[1])
            at("periods").fail("clifford map needs equal periods");
        s.target_dim = 3;
        if (target && target_value() != 3)
            at("target_dimension").fail("clifford map targets S^3");
    } else if (s.map_name == "constant") {
        const auto value = optional("map_value");
        if (!value)
            at("map").fail("constant map needs map_value");
        s.map_value = detail::to_point(detail::parse_numbers(*value, at("map_value")));
        if (std::abs(s.map_value.norm() - 1.0) > 1e-12)
            at("map_value").fail("map_value must be a unit vector");
        s.target_dim = static_cast<int>(s.map_value.size()) - 1;
        if (target && target_value() != s.target_dim)
            at("target_dimension").fail("target_dimension disagrees with map_value");
    } else {
        at("map").fail("unknown map '" + s.map_name + "' (identity, equator, clifford, constant)");
    }
    if (s.map_name != "constant" && optional("map_value"))
        at("map_value").fail("map_value applies to the constant map only");

    s.profile_name = required("profile");
    s.profile_parameter = detail::parse_number(required("profile_parameter"), at("profile_parameter"));
    try {
        (void)make_profile(s.profile_name, s.profile_parameter);
    } catch (const ConfigError& e) {
        at(s.profile_name == "power" || s.profile_name == "exp" || s.profile_name == "sacks-uhlenbeck"
               ? "profile_parameter"
               : "profile")
            .fail(e.what());
    }

    if (auto d = optional("directions")) {
        if (*d == "random") {
            s.random_directions = true;
        } else {
            s.random_directions = false;
            for (const auto& vec : detail::split(*d, ';')) {
                Point v = detail::to_point(detail::parse_numbers(vec, at("directions")));
                if (v.size() != s.target_dim + 1)
                    at("directions").fail("direction has " + std::to_string(v.size()) + " components, target S^"
                                          + std::to_string(s.target_dim) + " needs "
                                          + std::to_string(s.target_dim + 1));
                if (!(v.norm() > 0.0))
                    at("directions").fail("direction must be nonzero");
                s.explicit_directions.push_back(Point(v / v.norm()));
            }
        }
    }
    if (auto c = optional("direction_count")) {
        if (!s.random_directions)
            at("direction_count").fail("direction_count applies to random directions only");
        const long long n = detail::parse_integer(*c, at("direction_count"));
        if (n < 1 || n > 1000)
            at("direction_count").fail("direction_count must lie in [1, 1000]");
        s.direction_count = static_cast<int>(n);
    }
    if (auto seed = optional("seed")) {
        const long long v = detail::parse_integer(*seed, at("seed"));
        if (v < 0)
            at("seed").fail("seed must be nonnegative");
        s.seed = static_cast<std::uint64_t>(v);
    }
    if (auto g = optional("t_grid")) {
        s.t_grid = detail::parse_grid(*g, at("t_grid"));
        try {
            validate_grid(s.t_grid);
        } catch (const ConfigError& e) {
            at("t_grid").fail(e.what());
        }
    }

    for (const auto& c : detail::split(required("checks"), ',')) {
        if (std::find(known_checks().begin(), known_checks().end(), c) == known_checks().end())
            at("checks").fail("unknown check '" + c + "'");
        s.checks.insert(c);
    }
    if (auto e = optional("expect")) {
        const auto o = parse_outcome(*e);
        if (!o)
            at("expect").fail("expect must be THEOREM-VERIFIED, HYPOTHESES-FAIL or COUNTEREXAMPLE-FLAG");
        s.expect = *o;
    }
    if (auto f = optional("expect_failed")) {
        if (s.expect != TheoremOutcome::HypothesesFail)
            at("expect_failed").fail("expect_failed needs expect = HYPOTHESES-FAIL");
        for (const auto& h : detail::split(*f, ',')) {
            if (std::find(hypothesis_names().begin(), hypothesis_names().end(), h) == hypothesis_names().end())
                at("expect_failed").fail("unknown hypothesis '" + h + "'");
            s.expect_failed.insert(h);
        }
    }
    if (auto e = optional("expect_energy"))
        s.expect_energy = detail::parse_number(*e, at("expect_energy"));
    if (auto e = optional("energy_tolerance")) {
        s.energy_tolerance = detail::parse_number(*e, at("energy_tolerance"));
        if (!(s.energy_tolerance > 0.0))
            at("energy_tolerance").fail("energy_tolerance must be positive");
    }
    if (auto e = optional("lemma2_t0")) {
        s.lemma2_t0 = detail::parse_number(*e, at("lemma2_t0"));
        if (s.lemma2_t0 < 0.0)
            at("lemma2_t0").fail("lemma2_t0 must be nonnegative");
    }
    if (auto e = optional("decomposition_t0")) {
        s.decomposition_t0 = detail::parse_numbers(*e, at("decomposition_t0"));
        for (double t : s.decomposition_t0)
            if (t < 0.0)
                at("decomposition_t0").fail("decomposition_t0 values must be nonnegative");
    }
    s.output_dir = optional("output_dir").value_or("out/" + s.name);
    return s;
}

inline Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path.string());
}

// ---------------------------------------------------------------------------
// Construction

inline std::shared_ptr<const DomainManifold> build_domain(const Scenario& s)
{
    if (s.domain_kind == DomainKind::Sphere)
        return std::make_shared<const DomainManifold>(build_sphere_domain(s.domain_dim, s.resolution));
    return std::make_shared<const DomainManifold>(build_torus_domain(s.domain_dim, s.periods, s.resolution));
}

inline SmoothMap build_map(const Scenario& s, std::shared_ptr<const DomainManifold> domain)
{
    if (s.map_name == "identity")
        return identity_map(std::move(domain));
    if (s.map_name == "equator")
        return equator_map(std::move(domain), s.target_dim);
    if (s.map_name == "clifford")
        return clifford_map(std::move(domain));
    if (s.map_name == "constant")
        return constant_map(std::move(domain), s.map_value);
    throw ConfigError("unknown map '" + s.map_name + "'");
}

// ---------------------------------------------------------------------------
// Running

struct CheckVerdict {
    std::string check;
    bool pass = false;
    std::string detail;
};

struct RunResult {
    std::vector<CheckVerdict> verdicts;
    std::vector<std::string> files;
    std::optional<TheoremOutcome> outcome;

    bool all_pass() const
    {
        return std::all_of(verdicts.begin(), verdicts.end(), [](const CheckVerdict& v) { return v.pass; });
    }
    int exit_code() const { return all_pass() ? 0 : 1; }
};

inline CsvTable sweep_table(const SweepResult& sw)
{
    CsvTable t({"t", "E", "dE_fd", "lemma2_statement", "lemma2_proof", "Phi", "Chi", "minB", "minStressEig", "verdict"});
    for (const SweepRow& r : sw.rows)
        t.row()
            .add(r.t)
            .add(r.energy)
            .add(r.dE_fd)
            .add(r.lemma2_statement)
            .add(r.lemma2_proof)
            .add(r.phi)
            .add(r.chi)
            .add(r.min_B)
            .add(r.min_stress_eig)
            .add(std::string(r.within ? "PASS" : "FAIL"));
    return t;
}

namespace detail {

inline std::string fmt(double x)
{
    return format_double(x);
}

/// Whether a hypothesis is expected to hold for the scenario's expectation.
inline bool expect_hypothesis(const Scenario& s, const std::string& h)
{
    if (s.expect != TheoremOutcome::HypothesesFail)
        return true;
    return !s.expect_failed.count(h);
}

/// Hypothesis verdicts are informational when a failure is expected but the
/// failing hypothesis is not named.
inline bool hypothesis_judged(const Scenario& s)
{
    return s.expect != TheoremOutcome::HypothesesFail || !s.expect_failed.empty();
}

} // namespace detail

/// Runs every requested check, writes one CSV per check plus summary.txt into
/// out_dir, and returns the verdicts. Throws ConfigError for configuration
/// problems discovered while building the scenario.
inline RunResult run_scenario(const Scenario& s, const std::filesystem::path& out_dir, std::ostream* log = nullptr)
{
    namespace fs = std::filesystem;
    RunResult res;
    auto say = [&](const std::string& m) {
        if (log)
            *log << m << std::endl;
    };
    auto save = [&](const CsvTable& table, const std::string& file) {
        table.save(out_dir / file);
        res.files.push_back(file);
    };

    const auto domain = build_domain(s);
    const Lab lab(build_map(s, domain), make_profile(s.profile_name, s.profile_parameter));
    const std::vector<Point> directions = s.directions();
    for (const Point& v : directions)
        if (v.size() != s.target_dim + 1)
            throw ConfigError("direction dimension does not match the target");
    fs::create_directories(out_dir);
    say("scenario " + s.name + ": " + domain->describe() + ", map " + lab.map().name() + ", profile "
        + lab.profile().label);

    {
        CsvTable t({"index", "components"});
        for (std::size_t k = 0; k < directions.size(); ++k) {
            std::string comps;
            for (int j = 0; j < directions[k].size(); ++j)
                comps += (j ? " " : "") + detail::fmt(directions[k](j));
            t.row().add(k).add(comps);
        }
        save(t, "directions.csv");
    }

    const bool judged = detail::hypothesis_judged(s);
    std::optional<TheoremReport> theorem;
    if (s.has("theorem")) {
        theorem = verify_theorem(lab, directions, s.t_grid);
        res.outcome = theorem->outcome;
    }

    if (s.has("energy")) {
        const double E = lab.energy();
        CsvTable t({"quantity", "value"});
        t.row().add(std::string("E_F")).add(E);
        t.row().add(std::string("volume")).add(integrate(*domain, std::vector<double>(domain->node_count(), 1.0)));
        t.row().add(std::string("analytic_volume")).add(domain->analytic_volume());
        t.row().add(std::string("nodes")).add(domain->node_count());
        if (s.expect_energy)
            t.row().add(std::string("expected_E_F")).add(*s.expect_energy);
        save(t, "energy.csv");
        bool ok = std::isfinite(E);
        std::string d = "E_F = " + detail::fmt(E);
        if (s.expect_energy) {
            ok = ok && std::abs(E - *s.expect_energy) <= s.energy_tolerance;
            d += ", expected " + detail::fmt(*s.expect_energy) + " +- " + detail::fmt(s.energy_tolerance);
        }
        res.verdicts.push_back({"energy", ok, d});
    }

    if (s.has("stress")) {
        const StressField st = stress_field(lab.fields(), lab.profile());
        const double smax = *std::max_element(st.min_eig.begin(), st.min_eig.end());
        const bool holds = st.global_min >= -kStressTolerance;
        CsvTable t({"quantity", "value"});
        t.row().add(std::string("stress_min_eigenvalue")).add(st.global_min);
        t.row().add(std::string("stress_min_eigenvalue_max_over_nodes")).add(smax);
        t.row().add(std::string("positive")).add(holds);
        t.row().add(std::string("strict")).add(st.global_min > kStressTolerance);
        t.row().add(std::string("tension_sup")).add(lab.tension().sup_norm);
        t.row().add(std::string("tension_max_normal")).add(lab.tension().max_normal_component);
        save(t, "stress.csv");
        const bool want = detail::expect_hypothesis(s, "stress-positive");
        res.verdicts.push_back({"stress", !judged || holds == want,
                                "S^{o,F} = " + detail::fmt(st.global_min) + (holds ? " (positive)" : " (negative)")});
    }

    if (s.has("admissibility")) {
        CsvTable t({"direction", "sign", "t", "minB", "maxAbsB", "minComparisonEig"});
        bool ok = true;
        double worst_b = std::numeric_limits<double>::infinity();
        double worst_eig = std::numeric_limits<double>::infinity();
        std::vector<AdmissibilityReport> reports;
        if (theorem) {
            reports = theorem->admissibility;
        } else {
            for (const Point& v : directions)
                for (const Point& u : {v, Point(-v)})
                    reports.push_back(check_tensor_comparison(*domain, lab.fields(), lab.profile(), u, s.t_grid));
        }
        for (std::size_t k = 0; k < reports.size(); ++k) {
            const AdmissibilityReport& r = reports[k];
            for (std::size_t j = 0; j < r.times.size(); ++j)
                t.row()
                    .add(k / 2)
                    .add(std::string(k % 2 ? "-" : "+"))
                    .add(r.times[j])
                    .add(r.min_B[j])
                    .add(r.max_abs_B[j])
                    .add(r.min_comparison_eig[j]);
            ok = ok && r.admissible();
            worst_b = std::min(worst_b, r.worst_B);
            worst_eig = std::min(worst_eig, r.worst_comparison_eig);
        }
        save(t, "admissibility.csv");
        const bool want = detail::expect_hypothesis(s, "admissible");
        res.verdicts.push_back({"admissibility", !judged || ok == want,
                                "min B = " + detail::fmt(worst_b) + ", min comparison eigenvalue = "
                                    + detail::fmt(worst_eig)});
    }

    if (s.has("sweep") || theorem) {
        bool ok = true;
        double margin = std::numeric_limits<double>::infinity();
        if (theorem) {
            for (std::size_t k = 0; k < theorem->sweeps.size(); ++k) {
                const SweepResult& sw = theorem->sweeps[k];
                save(sweep_table(sw), "sweep_d" + std::to_string(k / 2) + (k % 2 ? "_neg" : "_pos") + ".csv");
                ok = ok && sw.pass;
                margin = std::min(margin, sw.min_margin);
            }
        } else {
            for (std::size_t k = 0; k < directions.size(); ++k) {
                const SweepResult sw = energy_sweep(lab, directions[k], s.t_grid);
                save(sweep_table(sw), "sweep_d" + std::to_string(k) + "_pos.csv");
                ok = ok && sw.pass;
                margin = std::min(margin, sw.min_margin);
            }
        }
        if (s.has("sweep")) {
            const bool want = s.expect != TheoremOutcome::CounterexampleFlag;
            const bool sweep_judged = s.expect == TheoremOutcome::Verified || s.expect == TheoremOutcome::CounterexampleFlag;
            res.verdicts.push_back({"sweep", !sweep_judged || ok == want,
                                    std::string(ok ? "E(t) <= E(0) + tol on the grid" : "E(t) exceeds E(0) + tol")
                                        + ", min margin " + detail::fmt(margin)});
        }
    }

    if (s.has("lemma2")) {
        CsvTable t({"direction", "t0", "statement", "proof", "fd", "matched"});
        if (!lab.f_harmonic()) {
            res.verdicts.push_back({"lemma2", false,
                                    "map is not F-harmonic (sup|tau_F| = " + detail::fmt(lab.tension().sup_norm) + ")"});
        } else {
            bool ok = true;
            std::string matched;
            for (std::size_t k = 0; k < directions.size(); ++k) {
                const Lemma2Adjudication a = adjudicate_lemma2(lab, lab.direction(directions[k]), s.lemma2_t0);
                t.row().add(k).add(s.lemma2_t0).add(a.statement).add(a.proof).add(a.fd).add(a.matched());
                ok = ok && a.exactly_one();
                if (k == 0)
                    matched = a.matched();
            }
            res.verdicts.push_back({"lemma2", ok, "matching variant: " + matched});
        }
        save(t, "lemma2.csv");
    }

    if (s.has("decomposition")) {
        CsvTable t({"direction", "t0", "Phi", "Chi", "fd", "residual", "consistent", "minComposedStressEig", "halfSphere",
                    "admissible"});
        if (!lab.f_harmonic()) {
            res.verdicts.push_back({"decomposition", false,
                                    "map is not F-harmonic (sup|tau_F| = " + detail::fmt(lab.tension().sup_norm) + ")"});
        } else {
            bool ok = true;
            double worst = 0.0;
            for (std::size_t k = 0; k < directions.size(); ++k) {
                const DirectionalFields dir = lab.direction(directions[k]);
                const bool half = *std::min_element(dir.height.begin(), dir.height.end()) >= 0.0;
                const bool admissible
                    = check_tensor_comparison(*domain, lab.fields(), lab.profile(), dir.direction, s.decomposition_t0)
                          .admissible();
                for (double t0 : s.decomposition_t0) {
                    const CellTerms c = compute_cell(lab, dir, t0);
                    const Decomposition d{c.phi, c.chi, c.fd_derivative};
                    bool row_ok = d.consistent();
                    if (admissible && half)
                        row_ok = row_ok && d.chi <= 1e-10;
                    if (c.min_stress_eig >= -kStressTolerance)
                        row_ok = row_ok && d.phi <= 1e-10;
                    ok = ok && row_ok;
                    worst = std::max(worst, d.residual() / (1.0 + std::abs(d.fd)));
                    t.row()
                        .add(k)
                        .add(t0)
                        .add(d.phi)
                        .add(d.chi)
                        .add(d.fd)
                        .add(d.residual())
                        .add(row_ok)
                        .add(c.min_stress_eig)
                        .add(half)
                        .add(admissible);
                }
            }
            res.verdicts.push_back({"decomposition", ok, "max relative residual " + detail::fmt(worst)});
        }
        save(t, "decomposition.csv");
    }

    if (theorem) {
        bool ok = theorem->outcome == s.expect;
        if (s.expect == TheoremOutcome::HypothesesFail && !s.expect_failed.empty())
            ok = ok && std::set<std::string>(theorem->failed.begin(), theorem->failed.end()) == s.expect_failed;
        std::string failed;
        for (const auto& f : theorem->failed)
            failed += (failed.empty() ? "" : ",") + f;
        res.verdicts.push_back({"theorem", ok,
                                std::string(to_string(theorem->outcome)) + " (expected " + to_string(s.expect) + ")"
                                    + (failed.empty() ? "" : " failed: " + failed)});
    }

    std::ostringstream sum;
    sum << "scenario: " << s.name << "\n";
    sum << "domain: " << domain->describe() << "\n";
    sum << "map: " << lab.map().name() << " -> S^" << lab.map().target_dim() << "\n";
    sum << "profile: " << lab.profile().label << "\n";
    sum << "directions: " << directions.size() << (s.random_directions ? " random, seed " + std::to_string(s.seed) : " explicit")
        << "\n";
    if (theorem) {
        sum << "outcome: " << to_string(theorem->outcome) << "\n";
        sum << "tension_sup: " << detail::fmt(theorem->tension_sup) << "\n";
        sum << "stress_min: " << detail::fmt(theorem->stress_min) << (theorem->strict ? " (strict)" : "") << "\n";
        sum << "min_margin: " << detail::fmt(theorem->min_margin) << "\n";
        sum << "max_decomposition_residual: " << detail::fmt(theorem->max_decomposition_residual) << "\n";
    }
    for (const auto& v : res.verdicts)
        sum << "check " << v.check << ": " << (v.pass ? "PASS" : "FAIL") << " - " << v.detail << "\n";
    sum << "verdict: " << (res.all_pass() ? "PASS" : "FAIL") << "\n";
    CsvTable::write_text_file(out_dir / "summary.txt", sum.str());
    res.files.push_back("summary.txt");
    for (const auto& v : res.verdicts)
        say("  " + v.check + ": " + (v.pass ? "PASS" : "FAIL") + " - " + v.detail);
    return res;
}

// ---------------------------------------------------------------------------
// Built-in catalog

struct CatalogEntry {
    std::string name;
    std::string description;
    std::string config;
};

inline const std::vector<CatalogEntry>& builtin_catalog()
{
    static const std::vector<CatalogEntry> catalog = [] {
        std::vector<CatalogEntry> c;
        auto add = [&](std::string name, std::string description, std::string body) {
            c.push_back({name, std::move(description), "name = " + name + "\n" + body});
        };
        const std::string full = "checks = energy, stress, admissibility, lemma2, decomposition, theorem\n";
        const std::string hyp = "checks = energy, stress, admissibility, theorem\n";

        add("equator-s3-s4-p2", "equator S^3 -> S^4, F(t) = t; strict positive stress",
            "domain = sphere\ndimension = 3\nmap = equator\ntarget_dimension = 4\nprofile = power\n"
            "profile_parameter = 2\n"
                + full + "expect = THEOREM-VERIFIED\nexpect_energy = 29.608813203268074\n");
        add("equator-s3-s4-p4", "equator S^3 -> S^4, p = 4; stress -3/2, outside the hypotheses",
            "domain = sphere\ndimension = 3\nmap = equator\ntarget_dimension = 4\nprofile = power\n"
            "profile_parameter = 4\n"
                + hyp + "expect = HYPOTHESES-FAIL\nexpect_failed = stress-positive\n");
        add("equator-s3-s4-exp-halfsphere", "equator S^3 -> S^4, F(t) = 1 + 1.5 t - e^{-t}, flows along e_5",
            "domain = sphere\ndimension = 3\nmap = equator\ntarget_dimension = 4\nprofile = exp\n"
            "profile_parameter = 1.5\ndirections = 0,0,0,0,1\n"
                + full + "expect = THEOREM-VERIFIED\n");
        add("equator-s3-s4-su-halfsphere", "equator S^3 -> S^4, F(t) = (1 + 2t)^{1/2}, flows along e_5",
            "domain = sphere\ndimension = 3\nmap = equator\ntarget_dimension = 4\nprofile = sacks-uhlenbeck\n"
            "profile_parameter = 0.5\ndirections = 0,0,0,0,1\n"
                + full + "expect = THEOREM-VERIFIED\n");
        add("identity-s2-p2", "identity S^2 -> S^2, F(t) = t; equality case (conformal invariance)",
            "domain = sphere\ndimension = 2\nmap = identity\nprofile = power\nprofile_parameter = 2\n" + full
                + "expect = THEOREM-VERIFIED\nexpect_energy = 12.566370614359172\n");
        add("identity-s2-p4-negative-control", "identity S^2 -> S^2, p = 4; stress -2, energy rises along flows",
            "domain = sphere\ndimension = 2\nmap = identity\nprofile = power\nprofile_parameter = 4\n"
            "checks = energy, stress, admissibility, sweep, theorem\n"
            "expect = HYPOTHESES-FAIL\nexpect_failed = stress-positive\n");
        add("identity-s2-exp", "identity S^2 -> S^2, F(t) = 1 + t - e^{-t}, random directions",
            "domain = sphere\ndimension = 2\nmap = identity\nprofile = exp\nprofile_parameter = 1\n" + hyp
                + "expect = HYPOTHESES-FAIL\nexpect_failed = admissible\n");
        add("identity-s2-su", "identity S^2 -> S^2, F(t) = (1 + 2t)^{1/2}, random directions",
            "domain = sphere\ndimension = 2\nmap = identity\nprofile = sacks-uhlenbeck\nprofile_parameter = 0.5\n"
                + hyp + "expect = HYPOTHESES-FAIL\nexpect_failed = admissible\n");
        add("identity-s3-p2", "identity S^3 -> S^3, F(t) = t; strict positive stress",
            "domain = sphere\ndimension = 3\nmap = identity\nprofile = power\nprofile_parameter = 2\n" + full
                + "expect = THEOREM-VERIFIED\nexpect_energy = 29.608813203268074\n");
        add("clifford-t2-s3-p2", "Clifford torus T^2 -> S^3, F(t) = t; zero stress",
            "domain = torus\ndimension = 2\nmap = clifford\nprofile = power\nprofile_parameter = 2\n" + full
                + "expect = THEOREM-VERIFIED\nexpect_energy = 19.739208802178716\n");
        add("clifford-t2-s3-p4", "Clifford torus T^2 -> S^3, p = 4; stress -1/2",
            "domain = torus\ndimension = 2\nmap = clifford\nprofile = power\nprofile_parameter = 4\n" + hyp
                + "expect = HYPOTHESES-FAIL\nexpect_failed = stress-positive\n");
        add("clifford-t2-s3-exp", "Clifford torus T^2 -> S^3, F(t) = 1 + 0.5 t - e^{-t}",
            "domain = torus\ndimension = 2\nmap = clifford\nprofile = exp\nprofile_parameter = 0.5\n" + hyp
                + "expect = HYPOTHESES-FAIL\nexpect_failed = admissible\n");
        add("clifford-t2-s3-su", "Clifford torus T^2 -> S^3, F(t) = (1 + 2t)^{1/2}",
            "domain = torus\ndimension = 2\nmap = clifford\nprofile = sacks-uhlenbeck\nprofile_parameter = 0.5\n"
                + hyp + "expect = HYPOTHESES-FAIL\nexpect_failed = admissible\n");
        const std::string constant_checks = "checks = energy, stress, admissibility, decomposition, theorem\n";
        add("constant-s2-p2", "constant map S^2 -> S^2, F(t) = t; energy zero",
            "domain = sphere\ndimension = 2\nmap = constant\nmap_value = 0,0,1\nprofile = power\n"
            "profile_parameter = 2\n"
                + constant_checks + "expect = THEOREM-VERIFIED\nexpect_energy = 0\n");
        add("constant-s2-exp", "constant map S^2 -> S^2, F(t) = 1 + t - e^{-t}, flows orthogonal to the image",
            "domain = sphere\ndimension = 2\nmap = constant\nmap_value = 0,0,1\nprofile = exp\n"
            "profile_parameter = 1\ndirections = 1,0,0; 0,1,0\n"
                + constant_checks + "expect = THEOREM-VERIFIED\nexpect_energy = 0\n");
        add("constant-s2-exp-tilted", "constant map S^2 -> S^2, F(t) = 1 + t - e^{-t}, random directions",
            "domain = sphere\ndimension = 2\nmap = constant\nmap_value = 0,0,1\nprofile = exp\n"
            "profile_parameter = 1\n"
                + hyp + "expect = HYPOTHESES-FAIL\nexpect_failed = admissible\n");
        add("constant-s2-su", "constant map S^2 -> S^2, F(t) = (1 + 2t)^{1/2}, flows orthogonal to the image",
            "domain = sphere\ndimension = 2\nmap = constant\nmap_value = 0,0,1\nprofile = sacks-uhlenbeck\n"
            "profile_parameter = 0.5\ndirections = 1,0,0; 0,1,0\n"
                + constant_checks + "expect = THEOREM-VERIFIED\nexpect_energy = 12.566370614359172\n");
        return c;
    }();
    return catalog;
}

inline const CatalogEntry& catalog_entry(const std::string& name)
{
    for (const auto& e : builtin_catalog())
        if (e.name == name)
            return e;
    throw ConfigError("unknown catalog scenario '" + name + "' (see 'catalog list')");
}

inline Scenario catalog_scenario(const std::string& name)
{
    return parse_scenario(catalog_entry(name).config, "catalog:" + name);
}

} // namespace fharm
