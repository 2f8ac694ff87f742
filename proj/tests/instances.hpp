#pragma once

#include <limits>

#include "fedhp/control.hpp"

namespace instances {

// Random connected base topology: a random spanning tree plus extra links.
inline fedhp::Topology random_connected(std::size_t n, double extra, fedhp::Rng& rng) {
    fedhp::Topology t(n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t k = 1; k < n; ++k) t.add_edge(order[k], order[rng.below(k)]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (!t.has_edge(i, j) && rng.uniform() < extra) t.add_edge(i, j);
    return t;
}

// Controller inputs with Euclidean pairwise distances between random points
// and a threshold at or above the base topology's bound.
inline fedhp::ControlInputs random_inputs(std::size_t n, fedhp::Rng& rng) {
    fedhp::ControlInputs in;
    in.base_topology = random_connected(n, rng.uniform(0.2, 1.0), rng);
    in.mu.resize(n);
    for (auto& m : in.mu) m = rng.uniform(0.005, 0.1);
    in.beta = fedhp::SymMatrix(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) in.beta.set_diagonal(i, 0.0);
    for (const auto& [i, j] : in.base_topology.edges()) in.beta.set(i, j, rng.uniform(0.05, 2.0));

    std::vector<fedhp::Vec> points(n, fedhp::Vec(3));
    for (auto& p : points)
        for (auto& c : p) c = rng.normal();
    in.ledger = fedhp::DistanceLedger(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) in.ledger.set_distance(i, j, fedhp::l2_distance(points[i], points[j]));

    const double base_bound = fedhp::average_bound(in.ledger, in.base_topology);
    const double empty_bound = fedhp::average_bound(in.ledger, fedhp::Topology(n));
    const double r = rng.uniform();
    in.d_max = r < 0.1 ? base_bound : base_bound + rng.uniform(0.0, 0.6) * (empty_bound - base_bound);

    in.smoothness = rng.uniform(0.2, 2.0);
    in.grad_variance = rng.uniform(0.1, 2.0);
    in.eta = 0.05;
    in.initial_loss = 2.3;
    in.rounds_remaining = 10 + rng.below(200);
    return in;
}

}  // namespace instances
