// fedhp: run decentralized-training experiments, compare their metrics and
// evaluate the convergence bound.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "fedhp/bound.hpp"
#include "fedhp/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitRuntime = 4;

int run_command(const std::string& config_path) {
    fedhp::ExperimentConfig cfg;
    try {
        cfg = fedhp::load_config(config_path);
    } catch (const fedhp::ConfigError& e) {
        std::cerr << "fedhp: " << e.what() << '\n';
        return kExitConfig;
    }
    if (const char* dir = std::getenv("FEDHP_OUTPUT_DIR"); dir && *dir) {
        cfg.output = (std::filesystem::path(dir) / std::filesystem::path(cfg.output).filename()).string();
    }
    std::ofstream csv(cfg.output);
    if (!csv) {
        std::cerr << "fedhp: config key 'output': cannot write '" << cfg.output << "'\n";
        return kExitConfig;
    }
    try {
        const auto result = fedhp::run_experiment(cfg, csv);
        std::cerr << "fedhp: " << result.rows.size() << " rounds written to " << cfg.output
                  << (result.reached_target ? " (target accuracy reached)" : "") << '\n';
    } catch (const fedhp::NumericalError& e) {
        std::cerr << "fedhp: numerical abort: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const fedhp::ConfigError& e) {
        std::cerr << "fedhp: " << e.what() << '\n';
        return kExitConfig;
    } catch (const fedhp::SizingError& e) {
        std::cerr << "fedhp: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "fedhp: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}

int compare_command(const std::vector<std::string>& paths, std::optional<double> target) {
    try {
        std::vector<std::pair<std::string, fedhp::MetricsFile>> runs;
        for (const auto& p : paths) runs.emplace_back(std::filesystem::path(p).filename().string(), fedhp::load_metrics(p));
        fedhp::print_summary(std::cout, fedhp::compare(runs, target));
    } catch (const std::exception& e) {
        std::cerr << "fedhp: " << e.what() << '\n';
        return kExitConfig;
    }
    return 0;
}

int bound_command(const fedhp::BoundParams& p) {
    auto show = [](const char* name, auto fn) {
        try {
            std::cout << name << ' ' << fedhp::format_number(fn()) << '\n';
            return true;
        } catch (const fedhp::BoundDomainError& e) {
            std::cout << name << " undefined: " << e.what() << '\n';
            return false;
        }
    };
    bool ok = show("convergence_bound", [&] { return fedhp::convergence_bound(p); });
    ok &= show("suggested_eta", [&] { return fedhp::suggested_eta(p); });
    ok &= show("tau_threshold", [&] { return fedhp::tau_threshold(p); });
    ok &= show("convergence_rate", [&] { return fedhp::convergence_rate(p); });
    return ok ? 0 : kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized federated learning testbed with adaptive frequency and topology control"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run one experiment from a key=value config file");
    run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);

    std::vector<std::string> csvs;
    std::optional<double> target;
    auto* cmp = app.add_subcommand("compare", "Summarise two or more metrics CSVs");
    cmp->add_option("csv", csvs, "Metrics files")->required()->expected(2, -1);
    cmp->add_option("--target", target, "Target accuracy (defaults to the first run's config)");

    fedhp::BoundParams bp;
    auto* bnd = app.add_subcommand("bound", "Evaluate the convergence bound, learning rate and tau threshold");
    bnd->add_option("--L", bp.L, "Smoothness")->required();
    bnd->add_option("--sigma", bp.sigma, "Gradient noise")->required();
    bnd->add_option("--zeta", bp.zeta, "Data heterogeneity")->required();
    bnd->add_option("--rho", bp.rho, "Spectral gap")->required();
    bnd->add_option("--eta", bp.eta, "Learning rate")->required();
    bnd->add_option("--tau", bp.tau, "Local updating frequency")->required();
    bnd->add_option("--H", bp.H, "Rounds")->required();
    bnd->add_option("--N", bp.N, "Workers")->required();
    bnd->add_option("--f1", bp.f1, "Initial loss")->required();
    bnd->add_option("--f-star", bp.f_star, "Optimal loss");

    CLI11_PARSE(app, argc, argv);

    if (*run) return run_command(config_path);
    if (*cmp) return compare_command(csvs, target);
    return bound_command(bp);
}
