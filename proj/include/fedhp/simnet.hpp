#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fedhp/graphtopo.hpp"
#include "fedhp/numkit.hpp"

namespace fedhp {

enum class Heterogeneity { Mild, Severe };

Heterogeneity parse_heterogeneity(const std::string& name);
std::string to_string(Heterogeneity h);

// Per-worker Gaussian per-iteration compute time.
struct ComputeProfile {
    std::vector<double> mean;
    std::vector<double> stddev;

    std::size_t size() const { return mean.size(); }

    // Means uniform in [0.5, 2] x base (mild) or [0.2, 5] x base (severe);
    // stddev = 0.1 x mean.
    static ComputeProfile preset(Heterogeneity h, std::size_t workers, double base_seconds, Rng& rng);
};

// Per-worker bandwidth drawn each round, uniform in [min_mbps, max_mbps].
struct LinkModel {
    double min_mbps = 1.0;
    double max_mbps = 10.0;
    double model_bits = 0.0;

    // 32 bits per parameter plus 1% framing overhead.
    static LinkModel for_parameters(std::size_t param_count);
};

struct RoundTiming {
    std::vector<double> worker_time;  // t_i
    double round_time = 0.0;          // max_i t_i
    double waiting_avg = 0.0;         // (1/N) sum_i (round_time - t_i)
};

// Owns the heterogeneity draws of one simulation. Every draw is a pure
// function of (seed, round, worker) so replays are exact.
class SimNet {
public:
    SimNet(ComputeProfile compute, LinkModel links, std::uint64_t seed);

    std::size_t size() const { return compute_.size(); }
    const ComputeProfile& compute() const { return compute_; }
    const LinkModel& links() const { return links_; }

    // mu_i ~ Normal(mean_i, stddev_i^2), truncated below at 0.1 * mean_i.
    std::vector<double> sample_mu(std::size_t round) const;
    std::vector<double> sample_bandwidth(std::size_t round) const;
    // beta(i, j) = model_bits / min(bw_i, bw_j) on edges, +inf elsewhere.
    SymMatrix sample_beta(const Topology& t, std::size_t round) const;

private:
    ComputeProfile compute_;
    LinkModel links_;
    std::uint64_t seed_;
};

SymMatrix beta_from_bandwidth(const Topology& t, std::span<const double> bandwidth_mbps, double model_bits);

// t_i = tau_i * mu_i + max_{j in N_i} beta(i, j).
RoundTiming round_timing(std::span<const std::size_t> tau, std::span<const double> mu,
                         const SymMatrix& beta, const Topology& t);

}  // namespace fedhp
