#include "fedhp/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fedhp {

namespace {
constexpr std::uint64_t kWorkerTag = 0x57;
constexpr std::uint64_t kInitTag = 0x1417;
constexpr std::uint64_t kProbeTag = 0x9b;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

Algorithm parse_algorithm(const std::string& name) {
    if (name == "fedhp") return Algorithm::FedHP;
    if (name == "d-psgd") return Algorithm::DPSGD;
    if (name == "ld-sgd") return Algorithm::LDSGD;
    throw std::invalid_argument("unknown algorithm '" + name + "' (expected fedhp|d-psgd|ld-sgd)");
}

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::FedHP: return "fedhp";
        case Algorithm::DPSGD: return "d-psgd";
        case Algorithm::LDSGD: return "ld-sgd";
    }
    return "?";
}

std::vector<Vec> gossip_aggregate(const std::vector<Vec>& models, const Topology& t) {
    const std::size_t n = models.size();
    if (t.size() != n) throw std::invalid_argument("gossip_aggregate: topology size mismatch");
    const double w = 1.0 / static_cast<double>(t.max_degree() + 1);
    std::vector<Vec> out = models;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : t.neighbors(i)) {
            for (std::size_t q = 0; q < out[i].size(); ++q) out[i][q] += w * (models[j][q] - models[i][q]);
        }
    }
    return out;
}

namespace {

Vec mean_model(const std::vector<Vec>& models) {
    Vec mean(models.front().size(), 0.0);
    for (const auto& m : models)
        for (std::size_t q = 0; q < m.size(); ++q) mean[q] += m[q];
    for (double& v : mean) v /= static_cast<double>(models.size());
    return mean;
}

}  // namespace

double average_consensus_distance(const std::vector<Vec>& models) {
    if (models.empty()) return 0.0;
    const Vec mean = mean_model(models);
    double total = 0.0;
    for (const auto& m : models) total += l2_distance(mean, m);
    return total / static_cast<double>(models.size());
}

double median(std::vector<double> values) {
    if (values.empty()) return kNaN;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

Simulation::Simulation(SimulationConfig config, std::vector<Dataset> shards, Dataset test, Topology base,
                       SimNet net)
    : config_(config), test_(std::move(test)), base_(std::move(base)), net_(std::move(net)) {
    const std::size_t n = shards.size();
    if (n == 0) throw std::invalid_argument("Simulation: need at least one worker");
    if (base_.size() != n || net_.size() != n) throw std::invalid_argument("Simulation: worker count mismatch");
    if (!is_connected(base_)) throw std::invalid_argument("Simulation: base topology must be connected");
    if (config_.batch_size == 0 || config_.eval_every == 0) {
        throw std::invalid_argument("Simulation: batch_size and eval_every must be >= 1");
    }
    if (config_.algorithm.kind == Algorithm::LDSGD && config_.algorithm.local_rounds == 0) {
        throw std::invalid_argument("Simulation: LD-SGD needs at least one local round per cycle");
    }
    ring_ = Topology::ring(n);

    const ModelDims dims{shards.front().features, config_.hidden, shards.front().classes};
    Rng init_rng(config_.seed, kInitTag);
    const Model init = Model::initial(config_.model, dims, init_rng);

    double smooth = 0.0;
    double variance = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        WorkerState w{i, init, std::move(shards[i]), {}, Rng(config_.seed, stream_id(kWorkerTag, i)), {}};
        initial_loss_ += loss_and_gradient(w.model, w.shard).loss;
        Rng probe(config_.seed, stream_id(kProbeTag, i));
        w.estimates = probe_estimates(w.model, w.shard, config_.eta, config_.batch_size, config_.variance_probes, probe);
        smooth += w.estimates.smoothness;
        variance += w.estimates.grad_variance;
        workers_.push_back(std::move(w));
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    initial_loss_ *= inv_n;
    initial_tau_ = closed_form_tau(n, initial_loss_, smooth * inv_n, std::max<std::size_t>(config_.rounds, 1),
                                   config_.eta, variance * inv_n, config_.tau_cap);

    coordinator_.ledger = DistanceLedger(n, config_.beta1);
    coordinator_.threshold.beta2 = config_.beta2;
    coordinator_.smoothness = smooth * inv_n;
    coordinator_.grad_variance = variance * inv_n;
    coordinator_.budget = config_.rounds;
    coordinator_.plan = uniform_plan(base_, initial_tau_);
}

double Simulation::learning_rate(std::size_t round) const {
    return config_.eta * std::pow(config_.lr_decay, static_cast<double>(round - 1));
}

double Simulation::evaluate() const {
    double total = 0.0;
    for (const auto& w : workers_) total += accuracy(w.model, test_);
    return total / static_cast<double>(workers_.size());
}

Simulation::RoundPlan Simulation::plan_for_round(std::size_t round) const {
    const auto& choice = config_.algorithm;
    const std::size_t n = workers_.size();
    const std::size_t fixed = choice.fixed_tau > 0 ? choice.fixed_tau : initial_tau_;
    switch (choice.kind) {
        case Algorithm::FedHP:
            return {coordinator_.plan.topology, coordinator_.plan.tau};
        case Algorithm::DPSGD:
            return {ring_, std::vector<std::size_t>(n, fixed)};
        case Algorithm::LDSGD: {
            const std::size_t cycle = choice.local_rounds + choice.gossip_rounds;
            const bool local = (round - 1) % cycle < choice.local_rounds;
            return {choice.ldsgd_on_base ? base_ : ring_, std::vector<std::size_t>(n, local ? fixed : 0)};
        }
    }
    throw std::logic_error("unreachable");
}

RoundMetrics Simulation::step() {
    if (finished()) throw std::logic_error("Simulation::step: round budget exhausted");
    const std::size_t h = ++coordinator_.round;
    const std::size_t n = workers_.size();
    const RoundPlan plan = plan_for_round(h);
    const double eta = learning_rate(h);

    // Local updating.
    std::vector<Vec> sent(n);
    bool any_local = false;
    for (std::size_t i = 0; i < n; ++i) {
        auto& w = workers_[i];
        if (plan.tau[i] > 0) {
            any_local = true;
            LocalUpdateOptions opts;
            opts.tau = plan.tau[i];
            opts.eta = eta;
            opts.batch_size = config_.batch_size;
            opts.variance_probes = config_.variance_probes;
            opts.previous_smoothness = w.estimates.smoothness;
            w.estimates = local_update(w.model, w.shard, opts, w.rng).estimates;
        } else {
            w.estimates.update_norm = 0.0;
        }
        w.sent = w.model.params();
        sent[i] = w.sent;
    }

    // Exchange and aggregation over the round's topology.
    const auto mixed = gossip_aggregate(sent, plan.topology);
    for (std::size_t i = 0; i < n; ++i) {
        if (!all_finite(mixed[i])) {
            throw NumericalError("round " + std::to_string(h) + ": worker " + std::to_string(i) +
                                 " aggregated to a non-finite model; lower the learning rate");
        }
        workers_[i].model.params() = mixed[i];
    }

    if (!any_local) {
        ++diagnostics_.gossip_only_rounds;
        diagnostics_.max_gossip_mean_drift =
            std::max(diagnostics_.max_gossip_mean_drift, l2_distance(mean_model(mixed), mean_model(sent)));
    }
    if (config_.crosscheck_mixing && n <= 8) {
        const auto W = mixing_plan(plan.topology).W;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t q = 0; q < sent[i].size(); ++q) {
                double dense = 0.0;
                for (std::size_t j = 0; j < n; ++j) dense += W(i, j) * sent[j][q];
                diagnostics_.max_crosscheck_error =
                    std::max(diagnostics_.max_crosscheck_error, std::abs(dense - mixed[i][q]));
            }
        }
        ++diagnostics_.crosschecked_rounds;
    }

    // Timing on the virtual clock.
    const auto mu = net_.sample_mu(h);
    const auto bandwidth = net_.sample_bandwidth(h);
    const auto beta = beta_from_bandwidth(plan.topology, bandwidth, net_.links().model_bits);
    const auto timing = round_timing(plan.tau, mu, beta, plan.topology);
    cum_time_ += timing.round_time;

    RoundMetrics m;
    m.round = h;
    m.t_round = timing.round_time;
    m.cum_time = cum_time_;
    m.waiting_avg = timing.waiting_avg;
    const bool eval = h % config_.eval_every == 0 || h == config_.rounds;
    m.accuracy = eval ? evaluate() : kNaN;
    std::vector<Vec> current(n);
    for (std::size_t i = 0; i < n; ++i) current[i] = workers_[i].model.params();
    m.d_true = average_consensus_distance(current);
    std::vector<double> taus(plan.tau.begin(), plan.tau.end());
    m.tau_min = *std::min_element(taus.begin(), taus.end());
    m.tau_max = *std::max_element(taus.begin(), taus.end());
    m.tau_med = median(taus);
    m.links = plan.topology.link_count();
    m.d_bound_est = kNaN;
    m.d_max = kNaN;

    if (config_.algorithm.kind == Algorithm::FedHP) coordinate(plan, mu, bandwidth, m);
    return m;
}

void Simulation::coordinate(const RoundPlan& plan, const std::vector<double>& mu,
                            const std::vector<double>& bandwidth, RoundMetrics& metrics) {
    const std::size_t n = workers_.size();
    const std::size_t h = coordinator_.round;
    auto& co = coordinator_;

    if (co.plan.from_controller) {
        for (std::size_t i = 0; i < n; ++i) {
            ++diagnostics_.planned_worker_rounds;
            const bool holds = std::floor(co.plan.predicted_round_time / co.plan.predicted_times[i]) == 1.0;
            if (co.plan.clamped[i]) {
                ++diagnostics_.clamped_worker_rounds;
                if (!holds) ++diagnostics_.clamped_floor_violations;
            } else if (!holds) {
                ++diagnostics_.unclamped_floor_violations;
            }
        }
    }

    // Distances each worker measured against its neighbours.
    co.ledger.begin_round();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : plan.topology.neighbors(i)) {
            if (j > i) co.ledger.record_observed(i, j, l2_distance(workers_[i].sent, workers_[j].sent));
        }
    }
    co.ledger.estimate_unobserved();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (co.ledger.observed(i, j)) continue;
            ++diagnostics_.estimated_pairs;
            if (co.ledger.shortest_path(i, j) + 1e-9 >= l2_distance(workers_[i].sent, workers_[j].sent)) {
                ++diagnostics_.estimate_upper_bounds;
            }
        }
    }

    double smooth = 0.0, variance = 0.0, update_norm = 0.0;
    for (const auto& w : workers_) {
        smooth += w.estimates.smoothness;
        variance += w.estimates.grad_variance;
        update_norm += w.estimates.update_norm;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    co.smoothness = smooth * inv_n;
    co.grad_variance = variance * inv_n;
    co.threshold = update_threshold(co.threshold, update_norm * inv_n);

    metrics.d_bound_est = average_bound(co.ledger, plan.topology);
    metrics.d_max = co.threshold.d_max;

    if (h >= co.budget) return;

    ControlInputs in;
    in.mu = mu;
    in.beta = beta_from_bandwidth(base_, bandwidth, net_.links().model_bits);
    in.ledger = co.ledger;
    in.d_max = co.threshold.d_max;
    in.smoothness = co.smoothness;
    in.grad_variance = co.grad_variance;
    in.eta = learning_rate(h + 1);
    in.rounds_remaining = co.budget - h;
    in.base_topology = base_;
    in.initial_loss = initial_loss_;
    in.tau_cap = config_.tau_cap;
    co.plan = greedy_search(in);
    diagnostics_.plans.push_back({h + 1, co.plan.topology.link_count(), co.plan.pacing_worker,
                                  co.plan.tau[co.plan.pacing_worker], co.plan.predicted_total_time});
}

}  // namespace fedhp
