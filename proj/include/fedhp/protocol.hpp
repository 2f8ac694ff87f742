#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedhp/consensus.hpp"
#include "fedhp/control.hpp"
#include "fedhp/graphtopo.hpp"
#include "fedhp/learncore.hpp"
#include "fedhp/simnet.hpp"

namespace fedhp {

enum class Algorithm { FedHP, DPSGD, LDSGD };

Algorithm parse_algorithm(const std::string& name);
std::string to_string(Algorithm a);

struct AlgorithmChoice {
    Algorithm kind = Algorithm::FedHP;
    // Fixed tau for the baselines; 0 uses the closed-form tau of round 1.
    std::size_t fixed_tau = 0;
    // LD-SGD cycle: local_rounds rounds of (tau steps + gossip), then
    // gossip_rounds rounds of gossip only.
    std::size_t local_rounds = 4;
    std::size_t gossip_rounds = 1;
    // LD-SGD mixes over a ring unless told to use the base topology.
    bool ldsgd_on_base = false;
};

struct SimulationConfig {
    AlgorithmChoice algorithm;
    ModelKind model = ModelKind::SoftmaxRegression;
    std::size_t hidden = 32;
    std::size_t rounds = 100;
    double eta = 0.1;
    double lr_decay = 1.0;  // eta_h = eta * lr_decay^(h-1)
    std::size_t batch_size = 32;
    std::size_t variance_probes = 8;
    double beta1 = 0.5;
    double beta2 = 0.1;
    std::size_t tau_cap = kDefaultTauCap;
    std::size_t eval_every = 1;
    std::uint64_t seed = 1;
    // Compare every aggregation against the dense product X W (n <= 8).
    bool crosscheck_mixing = false;
};

struct RoundMetrics {
    std::size_t round = 0;
    double t_round = 0.0;
    double cum_time = 0.0;
    double waiting_avg = 0.0;
    double accuracy = 0.0;     // NaN on rounds without evaluation
    double d_true = 0.0;       // (1/N) sum_i ||xbar - x_i|| after aggregation
    double d_bound_est = 0.0;  // NaN for the baselines
    double d_max = 0.0;        // NaN for the baselines
    double tau_min = 0.0;
    double tau_med = 0.0;
    double tau_max = 0.0;
    std::size_t links = 0;
};

struct PlanTrace {
    std::size_t round = 0;  // round the plan governs
    std::size_t links = 0;
    std::size_t pacing_worker = 0;
    std::size_t tau_pacing = 0;
    double predicted_total_time = 0.0;
};

// Checks accumulated over a run; all counters are over worker-rounds or
// pairs as named.
struct Diagnostics {
    // Controller plans: floor(t_l / t_i) == 1 on predicted times.
    std::size_t planned_worker_rounds = 0;
    std::size_t unclamped_floor_violations = 0;
    std::size_t clamped_worker_rounds = 0;
    std::size_t clamped_floor_violations = 0;
    // Shortest-path estimates versus true distances on unmeasured pairs.
    std::size_t estimated_pairs = 0;
    std::size_t estimate_upper_bounds = 0;
    // Gossip-only rounds: drift of the average model.
    std::size_t gossip_only_rounds = 0;
    double max_gossip_mean_drift = 0.0;
    // Dense X W cross-check (when enabled).
    std::size_t crosschecked_rounds = 0;
    double max_crosscheck_error = 0.0;
    std::vector<PlanTrace> plans;
};

struct WorkerState {
    std::size_t id = 0;
    Model model;
    Dataset shard;
    GradEstimates estimates;
    Rng rng;
    Vec sent;  // post-local-update parameters shared with neighbours this round
};

struct CoordinatorState {
    DistanceLedger ledger{0};
    ThresholdState threshold;
    double smoothness = 0.0;
    double grad_variance = 0.0;
    ControlPlan plan;
    std::size_t round = 0;
    std::size_t budget = 0;
};

// One synchronous decentralized training run on a virtual clock.
class Simulation {
public:
    Simulation(SimulationConfig config, std::vector<Dataset> shards, Dataset test, Topology base, SimNet net);

    // Runs the next round. Throws NumericalError if a model stops being
    // finite.
    RoundMetrics step();
    bool finished() const { return coordinator_.round >= config_.rounds; }

    const SimulationConfig& config() const { return config_; }
    const std::vector<WorkerState>& workers() const { return workers_; }
    const CoordinatorState& coordinator() const { return coordinator_; }
    const Diagnostics& diagnostics() const { return diagnostics_; }
    const Topology& base_topology() const { return base_; }
    const Dataset& test_set() const { return test_; }
    const SimNet& net() const { return net_; }

    // Closed-form tau from the pre-training estimates; also the baselines'
    // default fixed tau.
    std::size_t initial_tau() const { return initial_tau_; }
    // Mean full-shard training loss at the initial model.
    double initial_loss() const { return initial_loss_; }
    double learning_rate(std::size_t round) const;
    double cumulative_time() const { return cum_time_; }

    // Mean top-1 test accuracy over worker models.
    double evaluate() const;

private:
    struct RoundPlan {
        Topology topology;
        std::vector<std::size_t> tau;
    };

    RoundPlan plan_for_round(std::size_t round) const;
    void coordinate(const RoundPlan& plan, const std::vector<double>& mu, const std::vector<double>& bandwidth,
                    RoundMetrics& metrics);

    SimulationConfig config_;
    std::vector<WorkerState> workers_;
    Dataset test_;
    Topology base_;
    Topology ring_;
    SimNet net_;
    CoordinatorState coordinator_;
    Diagnostics diagnostics_;
    std::size_t initial_tau_ = 1;
    double initial_loss_ = 0.0;
    double cum_time_ = 0.0;
};

// x_i + sum_{j in N_i} w (x_j - x_i) for every worker, w = 1 / (u_max + 1).
std::vector<Vec> gossip_aggregate(const std::vector<Vec>& models, const Topology& t);

// (1/N) sum_i ||xbar - x_i||.
double average_consensus_distance(const std::vector<Vec>& models);

double median(std::vector<double> values);

}  // namespace fedhp
