#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedhp/dataprep.hpp"
#include "fedhp/protocol.hpp"

namespace fedhp {

inline constexpr const char* kMetricsSchema = "fedhp-metrics/1";
inline constexpr const char* kMetricsHeader =
    "round,t_round,cum_time,waiting_avg,accuracy,D_true,D_bound_est,d_max,tau_min,tau_med,tau_max,links";

// Bad configuration; the message names the offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& key, const std::string& what)
        : std::invalid_argument("config key '" + key + "': " + what), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct ExperimentConfig {
    SimulationConfig sim;
    SyntheticSpec data;
    std::size_t workers = 16;
    double partition_p = 0.1;
    Heterogeneity heterogeneity = Heterogeneity::Severe;
    double compute_base = 0.001;  // seconds per iteration before preset scaling
    double bandwidth_min_mbps = 1.0;
    double bandwidth_max_mbps = 10.0;
    std::string topology = "full";  // full | ring | path to an edge list
    std::optional<double> target_accuracy;
    std::string output = "metrics.csv";
    std::string shards_csv;  // optional shard export
    std::string ledger_csv;  // optional final distance-ledger dump (fedhp)
    bool verbose = false;    // plan trace as comment lines
};

// Flat "key = value" text; '#' starts a comment. Unknown keys, malformed
// values and out-of-range parameters raise ConfigError.
ExperimentConfig parse_config(std::istream& in, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);
// Canonical key=value listing of every setting, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg);

Topology build_base_topology(const ExperimentConfig& cfg);
Simulation build_simulation(const ExperimentConfig& cfg);

std::string format_number(double v);
std::string format_row(const RoundMetrics& m);

struct RunResult {
    std::vector<RoundMetrics> rows;
    bool reached_target = false;
};

// Runs to the round budget (or the target accuracy) and writes the metrics
// CSV: schema tag and config as '#' comment lines, then the header and one
// row per round. Throws NumericalError on divergence.
RunResult run_experiment(const ExperimentConfig& cfg, std::ostream& csv);
RunResult run_experiment(Simulation& sim, const ExperimentConfig& cfg, std::ostream& csv);

struct MetricsFile {
    std::map<std::string, std::string> config;
    std::vector<RoundMetrics> rows;
};

MetricsFile read_metrics(std::istream& in);
MetricsFile load_metrics(const std::string& path);

struct RunSummary {
    std::string label;
    std::string algorithm;
    std::optional<double> time_to_target;
    double final_accuracy = 0.0;
    double mean_waiting = 0.0;
};

struct Comparison {
    std::optional<double> target;
    std::vector<RunSummary> runs;
};

// Per run: time to the target accuracy, last evaluated accuracy, mean
// waiting time. Runs must share their dataset settings. The target defaults
// to the first run's target_accuracy.
Comparison compare(const std::vector<std::pair<std::string, MetricsFile>>& runs, std::optional<double> target);
void print_summary(std::ostream& out, const Comparison& comparison);

}  // namespace fedhp
