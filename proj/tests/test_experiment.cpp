#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "fedhp/experiment.hpp"

using namespace fedhp;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text, const std::string& dir = ".") {
    std::istringstream in(text);
    return parse_config(in, dir);
}

std::string config_error_key(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return {};
}

const char* kSmall =
    "workers = 4\nrounds = 6\nclasses = 3\nfeatures = 5\nsamples_per_class = 30\n"
    "partition_p = 0.5\nbatch_size = 8\ntau_cap = 5\n";

std::string run_to_string(const ExperimentConfig& cfg) {
    std::ostringstream out;
    run_experiment(cfg, out);
    return out.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("fedhp_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int cli(const std::string& args) {
    const int status = std::system((std::string(FEDHP_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse("# comment\nalgorithm = ld-sgd  # trailing\nworkers=8\neta = 0.05\nseed = 7\n"
                           "target_accuracy = 0.8\nldsgd_i1 = 3\nldsgd_i2 = 2\nheterogeneity = mild\nmodel = mlp\n");
    CHECK(cfg.sim.algorithm.kind == Algorithm::LDSGD);
    CHECK(cfg.workers == 8);
    CHECK(cfg.sim.eta == 0.05);
    CHECK(cfg.sim.seed == 7);
    CHECK(cfg.data.seed == 7);
    CHECK(*cfg.target_accuracy == 0.8);
    CHECK(cfg.sim.algorithm.local_rounds == 3);
    CHECK(cfg.sim.algorithm.gossip_rounds == 2);
    CHECK(cfg.heterogeneity == Heterogeneity::Mild);
    CHECK(cfg.sim.model == ModelKind::Mlp);
}

TEST_CASE("config errors name the offending key") {
    CHECK(config_error_key("colour = red\n") == "colour");
    CHECK(config_error_key("workers = many\n") == "workers");
    CHECK(config_error_key("workers = 0\n") == "workers");
    CHECK(config_error_key("rounds = -3\n") == "rounds");
    CHECK(config_error_key("partition_p = 1.5\n") == "partition_p");
    CHECK(config_error_key("eta = 0\n") == "eta");
    CHECK(config_error_key("algorithm = pens\n") == "algorithm");
    CHECK(config_error_key("heterogeneity = wild\n") == "heterogeneity");
    CHECK(config_error_key("topology = missing_file.txt\n") == "topology");
    CHECK(config_error_key("beta1 = 2\n") == "beta1");
    CHECK(config_error_key("eta =\n") == "eta");
    CHECK(config_error_key("verbose = maybe\n") == "verbose");
}

TEST_CASE("edge-list topologies resolve against the config directory") {
    const auto dir = scratch_dir("edges");
    std::ofstream(dir / "path.txt") << "0 1\n1 2\n2 3\n";
    auto cfg = parse(std::string(kSmall) + "topology = path.txt\n", dir.string());
    CHECK(build_base_topology(cfg).link_count() == 3);

    std::ofstream(dir / "split.txt") << "0 1\n2 3\n";
    cfg = parse(std::string(kSmall) + "topology = split.txt\n", dir.string());
    CHECK_THROWS_AS(build_base_topology(cfg), ConfigError);
}

TEST_CASE("metrics file layout") {
    const auto text = run_to_string(parse(kSmall));
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    CHECK(line == std::string("# schema: ") + kMetricsSchema);
    std::size_t data_rows = 0;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.rfind("#", 0) == 0) continue;
        if (!header) {
            CHECK(line == kMetricsHeader);
            header = true;
            continue;
        }
        ++data_rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 11);
    }
    CHECK(data_rows == 6);

    std::istringstream again(text);
    const auto mf = read_metrics(again);
    CHECK(mf.rows.size() == 6);
    CHECK(mf.config.at("algorithm") == "fedhp");
    CHECK(mf.rows.back().round == 6);
}

TEST_CASE("empty round budget writes only the header") {
    const auto text = run_to_string(parse(std::string(kSmall) + "rounds = 0\n"));
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> body;
    while (std::getline(in, line))
        if (line.rfind("#", 0) != 0) body.push_back(line);
    CHECK(body == std::vector<std::string>{kMetricsHeader});
}

TEST_CASE("same seed gives byte-identical output") {
    for (const char* algo : {"fedhp", "d-psgd", "ld-sgd"}) {
        const auto cfg = parse(std::string(kSmall) + "algorithm = " + algo + "\nverbose = true\n");
        CHECK(run_to_string(cfg) == run_to_string(cfg));
    }
    const auto a = run_to_string(parse(std::string(kSmall) + "seed = 1\n"));
    const auto b = run_to_string(parse(std::string(kSmall) + "seed = 2\n"));
    CHECK(a != b);
}

TEST_CASE("target accuracy stops the run early") {
    auto cfg = parse(std::string(kSmall) + "target_accuracy = 0\n");
    std::ostringstream out;
    const auto res = run_experiment(cfg, out);
    CHECK(res.reached_target);
    CHECK(res.rows.size() == 1);
}

TEST_CASE("comparison summaries") {
    auto fed = parse(kSmall);
    auto dp = parse(std::string(kSmall) + "algorithm = d-psgd\n");
    std::istringstream a(run_to_string(fed)), b(run_to_string(dp));
    const std::vector<std::pair<std::string, MetricsFile>> runs{{"fed", read_metrics(a)}, {"dp", read_metrics(b)}};

    const auto none = compare(runs, 1.01);
    std::ostringstream out;
    print_summary(out, none);
    CHECK(out.str().find("not reached") != std::string::npos);
    CHECK_FALSE(none.runs[0].time_to_target);

    const auto reached = compare(runs, 0.0);
    CHECK(reached.runs[0].time_to_target);
    CHECK(*reached.runs[0].time_to_target == doctest::Approx(runs[0].second.rows[0].cum_time));
    CHECK(reached.runs[1].algorithm == "d-psgd");

    const auto again = compare(runs, 0.5);
    std::ostringstream o1, o2;
    print_summary(o1, again);
    print_summary(o2, compare(runs, 0.5));
    CHECK(o1.str() == o2.str());

    auto other = parse(std::string(kSmall) + "seed = 3\n");
    std::istringstream c(run_to_string(other));
    CHECK_THROWS(compare({runs[0], {"other", read_metrics(c)}}, std::nullopt));
    CHECK_THROWS(compare({runs[0]}, std::nullopt));
}

TEST_CASE("command line exit codes and determinism") {
    const auto dir = scratch_dir("cli");
    std::ofstream(dir / "ok.conf") << kSmall << "output = out.csv\n";
    std::ofstream(dir / "bad.conf") << "workers = none\n";
    std::ofstream(dir / "diverge.conf") << kSmall << "spread = 10000\neta = 1e307\nalgorithm = d-psgd\noutput = x.csv\n";

    const std::string env = "FEDHP_OUTPUT_DIR=" + dir.string() + " ";
    const std::string bin = std::string(FEDHP_CLI_PATH);
    auto run = [&](const std::string& args) {
        const int status = std::system((env + bin + " " + args + " >/dev/null 2>&1").c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    REQUIRE(run("run " + (dir / "ok.conf").string()) == 0);
    const auto first = slurp(dir / "out.csv");
    REQUIRE(run("run " + (dir / "ok.conf").string()) == 0);
    CHECK(slurp(dir / "out.csv") == first);
    CHECK_FALSE(first.empty());

    CHECK(run("run " + (dir / "bad.conf").string()) == 2);
    CHECK(run("run " + (dir / "diverge.conf").string()) == 3);
    CHECK(cli("bound --L 1 --sigma 1 --zeta 1 --rho 0.5 --eta 0.01 --tau 4 --H 100 --N 8 --f1 1") == 0);
    CHECK(cli("bound --L 1 --sigma 1 --zeta 1 --rho 0.9 --eta 0.1 --tau 4 --H 100 --N 8 --f1 1") == 2);
    CHECK(cli("compare " + (dir / "out.csv").string() + " " + (dir / "out.csv").string()) == 0);
    CHECK(cli("frobnicate") != 0);
}
