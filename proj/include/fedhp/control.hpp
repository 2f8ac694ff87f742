#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "fedhp/consensus.hpp"
#include "fedhp/graphtopo.hpp"
#include "fedhp/numkit.hpp"

namespace fedhp {

inline constexpr std::size_t kDefaultTauCap = 64;

// Everything the coordinator knows when planning the next round.
struct ControlInputs {
    Vec mu;                      // per-iteration compute time per worker (s)
    SymMatrix beta;              // link transfer time (s); +inf off the base topology
    DistanceLedger ledger{0};
    double d_max = 0.0;
    double smoothness = 0.0;     // averaged L_i
    double grad_variance = 0.0;  // averaged sigma_i
    double eta = 0.1;
    std::size_t rounds_remaining = 1;
    Topology base_topology;
    double initial_loss = 0.0;   // f(x^1), frozen after round 1
    std::size_t tau_cap = kDefaultTauCap;

    std::size_t workers() const { return mu.size(); }
};

struct ControlPlan {
    Topology topology;
    std::vector<std::size_t> tau;
    std::size_t pacing_worker = 0;
    double predicted_round_time = 0.0;   // t_l
    double predicted_total_time = 0.0;   // rounds_remaining * t_l
    std::vector<double> predicted_times; // t_i under the assigned tau
    std::vector<char> clamped;           // tau_i forced up to 1
    // Clamped workers whose predicted time breaks floor(t_l / t_i) == 1.
    std::size_t floor_violations = 0;
    bool from_controller = false;        // false for the uniform first-round plan
};

// round(sqrt(N f1 / (L H eta^2 sigma^2))) clamped to [1, tau_cap]; tau_cap
// when the denominator vanishes.
std::size_t closed_form_tau(std::size_t workers, double initial_loss, double smoothness,
                            std::size_t rounds, double eta, double grad_variance,
                            std::size_t tau_cap = kDefaultTauCap);
std::size_t closed_form_tau(const ControlInputs& in);

// max_{j in N_i} beta(i, j); 0 for an isolated worker.
double max_link_time(const Topology& t, const SymMatrix& beta, std::size_t i);

struct Candidate {
    std::size_t pacing_worker = 0;
    std::size_t tau = 1;
    double total_time = 0.0;
};

// Pacing worker l = argmin_i H * (tau* mu_i + max beta_i), smallest index on
// ties.
Candidate evaluate_candidate(const Topology& t, const ControlInputs& in);

// Per-worker tau anchored on the pacing worker's round time
// t_l = tau_l mu_l + max beta_l: each other worker gets the largest tau with
// t_i <= t_l, at least 1.
ControlPlan assign_frequencies(const Topology& t, std::size_t pacing_worker, std::size_t tau_pacing,
                               const ControlInputs& in);

// Greedy slow-link pruning from the base topology with a halving search
// step. Links are only removed while the graph stays connected and the
// average distance bound stays within d_max; a batch of removals is kept
// only if the predicted total time strictly drops.
ControlPlan greedy_search(const ControlInputs& in);

// Base topology with closed_form_tau for everyone.
ControlPlan uniform_plan(const Topology& base, std::size_t tau);

}  // namespace fedhp
