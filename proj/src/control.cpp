#include "fedhp/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fedhp {

std::size_t closed_form_tau(std::size_t workers, double initial_loss, double smoothness,
                            std::size_t rounds, double eta, double grad_variance, std::size_t tau_cap) {
    if (tau_cap == 0) throw std::invalid_argument("closed_form_tau: tau_cap must be >= 1");
    const double denom = smoothness * static_cast<double>(rounds) * eta * eta * grad_variance * grad_variance;
    if (!(denom > 0.0) || !std::isfinite(denom)) return tau_cap;
    const double raw = std::sqrt(static_cast<double>(workers) * std::max(initial_loss, 0.0) / denom);
    if (!std::isfinite(raw) || raw >= static_cast<double>(tau_cap)) return tau_cap;
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(raw)), 1, tau_cap);
}

std::size_t closed_form_tau(const ControlInputs& in) {
    return closed_form_tau(in.workers(), in.initial_loss, in.smoothness, in.rounds_remaining, in.eta,
                           in.grad_variance, in.tau_cap);
}

double max_link_time(const Topology& t, const SymMatrix& beta, std::size_t i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j)
        if (t.has_edge(i, j)) worst = std::max(worst, beta(i, j));
    return worst;
}

Candidate evaluate_candidate(const Topology& t, const ControlInputs& in) {
    const std::size_t n = in.workers();
    if (n == 0 || t.size() != n) throw std::invalid_argument("evaluate_candidate: size mismatch");
    Candidate best;
    best.tau = closed_form_tau(in);
    const double horizon = static_cast<double>(in.rounds_remaining);
    best.total_time = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double total = horizon * (static_cast<double>(best.tau) * in.mu[i] + max_link_time(t, in.beta, i));
        if (total < best.total_time) {
            best.total_time = total;
            best.pacing_worker = i;
        }
    }
    return best;
}

ControlPlan assign_frequencies(const Topology& t, std::size_t pacing_worker, std::size_t tau_pacing,
                               const ControlInputs& in) {
    const std::size_t n = in.workers();
    if (pacing_worker >= n) throw std::out_of_range("assign_frequencies: pacing worker out of range");
    if (tau_pacing == 0) throw std::invalid_argument("assign_frequencies: tau_pacing must be >= 1");

    ControlPlan plan;
    plan.topology = t;
    plan.pacing_worker = pacing_worker;
    plan.tau.assign(n, 1);
    plan.predicted_times.assign(n, 0.0);
    plan.clamped.assign(n, 0);
    plan.from_controller = true;

    const double t_l = static_cast<double>(tau_pacing) * in.mu[pacing_worker] + max_link_time(t, in.beta, pacing_worker);
    plan.predicted_round_time = t_l;
    plan.predicted_total_time = static_cast<double>(in.rounds_remaining) * t_l;

    for (std::size_t i = 0; i < n; ++i) {
        const double link = max_link_time(t, in.beta, i);
        auto time_at = [&](std::size_t tau) { return static_cast<double>(tau) * in.mu[i] + link; };
        if (i == pacing_worker) {
            plan.tau[i] = tau_pacing;
        } else {
            const double raw = std::floor((t_l - link) / in.mu[i]);
            if (!(raw >= 1.0)) {
                plan.tau[i] = 1;
                plan.clamped[i] = 1;
            } else {
                auto tau = static_cast<std::size_t>(raw);
                // Settle floating-point rounding so that time_at(tau) <= t_l < time_at(tau + 1).
                while (tau > 1 && time_at(tau) > t_l) --tau;
                while (time_at(tau + 1) <= t_l) ++tau;
                plan.tau[i] = tau;
                plan.clamped[i] = time_at(tau) > t_l ? 1 : 0;
            }
        }
        plan.predicted_times[i] = time_at(plan.tau[i]);
        if (plan.clamped[i] && std::floor(t_l / plan.predicted_times[i]) != 1.0) ++plan.floor_violations;
    }
    return plan;
}

namespace {

struct Evaluated {
    Topology topology;
    Candidate candidate;
};

}  // namespace

ControlPlan greedy_search(const ControlInputs& in) {
    const std::size_t n = in.workers();
    if (in.base_topology.size() != n || in.beta.size() != n || in.ledger.size() != n) {
        throw std::invalid_argument("greedy_search: inputs disagree on worker count");
    }
    if (!is_connected(in.base_topology)) throw std::invalid_argument("greedy_search: base topology is disconnected");

    const double inv_n2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    Evaluated best{in.base_topology, evaluate_candidate(in.base_topology, in)};
    std::size_t step = n;
    bool improving = true;

    while (true) {
        if (improving) {
            step = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(best.topology.link_count()))));
        } else {
            step /= 2;
        }

        // Links whose individual removal keeps the bound within d_max,
        // slowest first, ties by (i, j).
        const double bound_now = average_bound(in.ledger, best.topology);
        std::vector<Edge> pool;
        for (const auto& e : best.topology.edges()) {
            if (bound_now + 2.0 * in.ledger.distance(e.first, e.second) * inv_n2 <= in.d_max) pool.push_back(e);
        }
        std::stable_sort(pool.begin(), pool.end(), [&](const Edge& a, const Edge& b) {
            return in.beta(a.first, a.second) > in.beta(b.first, b.second);
        });
        if (pool.size() > step) pool.resize(step);

        Topology trial = best.topology;
        for (const auto& [i, j] : pool) {
            trial.remove_edge(i, j);
            if (!is_connected(trial) || average_bound(in.ledger, trial) > in.d_max) trial.add_edge(i, j);
        }

        const Candidate cand = evaluate_candidate(trial, in);
        if (cand.total_time < best.candidate.total_time) {
            best = {std::move(trial), cand};
            improving = true;
        } else {
            improving = false;
        }
        if (!improving && step <= 1) break;
    }

    return assign_frequencies(best.topology, best.candidate.pacing_worker, best.candidate.tau, in);
}

ControlPlan uniform_plan(const Topology& base, std::size_t tau) {
    ControlPlan plan;
    plan.topology = base;
    plan.tau.assign(base.size(), tau);
    plan.predicted_times.assign(base.size(), 0.0);
    plan.clamped.assign(base.size(), 0);
    return plan;
}

}  // namespace fedhp
