#include "fharm/fharm.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kExitConfig = 2;

int run_and_report(const fharm::Scenario& scenario, const std::string& out_override)
{
    const std::filesystem::path out = out_override.empty() ? scenario.output_dir : out_override;
    const auto start = std::chrono::steady_clock::now();
    const fharm::RunResult result = fharm::run_scenario(scenario, out, &std::cout);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << scenario.name << ": " << (result.all_pass() ? "PASS" : "FAIL") << " (" << seconds << " s, "
              << fharm::thread_count() << " threads) -> " << out.string() << "\n";
    return result.exit_code();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Numerical checks of energy monotonicity for F-harmonic maps under conformal flows of S^n.\n"
                 "Worker threads: FHARM_THREADS (default: hardware concurrency)."};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "Run a scenario config file");
    run->add_option("config", config_path, "Scenario config (key = value)")->required();
    run->add_option("--out", out_dir, "Output directory (overrides output_dir)");

    auto* catalog = app.add_subcommand("catalog", "Built-in scenarios");
    catalog->require_subcommand(1);
    auto* list = catalog->add_subcommand("list", "List built-in scenarios");
    std::string catalog_name;
    auto* crun = catalog->add_subcommand("run", "Run a built-in scenario");
    crun->add_option("name", catalog_name, "Scenario name")->required();
    crun->add_option("--out", out_dir, "Output directory (default out/<name>)");
    auto* show = catalog->add_subcommand("show", "Print the config of a built-in scenario");
    show->add_option("name", catalog_name, "Scenario name")->required();

    std::string csv_path;
    std::string svg_path;
    auto* plot = app.add_subcommand("plot", "Plot E(t) from a sweep CSV as SVG");
    plot->add_option("csv", csv_path, "Sweep CSV")->required();
    plot->add_option("svg", svg_path, "Output SVG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (run->parsed())
            return run_and_report(fharm::load_scenario(config_path), out_dir);
        if (list->parsed()) {
            for (const auto& e : fharm::builtin_catalog())
                std::cout << e.name << "\t" << e.description << "\n";
            return 0;
        }
        if (crun->parsed())
            return run_and_report(fharm::catalog_scenario(catalog_name), out_dir);
        if (show->parsed()) {
            std::cout << fharm::catalog_entry(catalog_name).config;
            return 0;
        }
        if (plot->parsed()) {
            fharm::emit_plot(csv_path, svg_path);
            std::cout << "wrote " << svg_path << "\n";
            return 0;
        }
    } catch (const fharm::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
