#include "fedhp/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fedhp/control.hpp"

namespace fedhp {

namespace {
constexpr std::uint64_t kComputeTag = 0xC0;
constexpr std::uint64_t kBandwidthTag = 0xB4;
}  // namespace

Heterogeneity parse_heterogeneity(const std::string& name) {
    if (name == "mild") return Heterogeneity::Mild;
    if (name == "severe") return Heterogeneity::Severe;
    throw std::invalid_argument("unknown heterogeneity preset '" + name + "' (expected mild|severe)");
}

std::string to_string(Heterogeneity h) { return h == Heterogeneity::Mild ? "mild" : "severe"; }

ComputeProfile ComputeProfile::preset(Heterogeneity h, std::size_t workers, double base_seconds, Rng& rng) {
    if (!(base_seconds > 0.0)) throw std::invalid_argument("ComputeProfile: base time must be positive");
    const double lo = h == Heterogeneity::Mild ? 0.5 : 0.2;
    const double hi = h == Heterogeneity::Mild ? 2.0 : 5.0;
    ComputeProfile p;
    for (std::size_t i = 0; i < workers; ++i) {
        const double m = rng.uniform(lo, hi) * base_seconds;
        p.mean.push_back(m);
        p.stddev.push_back(0.1 * m);
    }
    return p;
}

LinkModel LinkModel::for_parameters(std::size_t param_count) {
    LinkModel lm;
    lm.model_bits = 32.0 * static_cast<double>(param_count) * 1.01;
    return lm;
}

SimNet::SimNet(ComputeProfile compute, LinkModel links, std::uint64_t seed)
    : compute_(std::move(compute)), links_(links), seed_(seed) {
    if (compute_.mean.size() != compute_.stddev.size()) throw std::invalid_argument("SimNet: profile size mismatch");
    for (std::size_t i = 0; i < compute_.size(); ++i) {
        if (!(compute_.mean[i] > 0.0) || !(compute_.stddev[i] >= 0.0)) {
            throw std::invalid_argument("SimNet: compute means must be > 0 and stddevs >= 0");
        }
    }
    if (!(links_.min_mbps > 0.0) || links_.max_mbps < links_.min_mbps) {
        throw std::invalid_argument("SimNet: bandwidth range must satisfy 0 < min <= max");
    }
}

std::vector<double> SimNet::sample_mu(std::size_t round) const {
    std::vector<double> mu(size());
    for (std::size_t i = 0; i < size(); ++i) {
        Rng rng(seed_, stream_id(kComputeTag, round, i));
        const double draw = rng.normal(compute_.mean[i], compute_.stddev[i]);
        mu[i] = std::max(draw, 0.1 * compute_.mean[i]);
    }
    return mu;
}

std::vector<double> SimNet::sample_bandwidth(std::size_t round) const {
    std::vector<double> bw(size());
    for (std::size_t i = 0; i < size(); ++i) {
        Rng rng(seed_, stream_id(kBandwidthTag, round, i));
        bw[i] = rng.uniform(links_.min_mbps, links_.max_mbps);
    }
    return bw;
}

SymMatrix SimNet::sample_beta(const Topology& t, std::size_t round) const {
    if (t.size() != size()) throw std::invalid_argument("sample_beta: topology size mismatch");
    return beta_from_bandwidth(t, sample_bandwidth(round), links_.model_bits);
}

SymMatrix beta_from_bandwidth(const Topology& t, std::span<const double> bandwidth_mbps, double model_bits) {
    const std::size_t n = t.size();
    SymMatrix beta(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        beta.set_diagonal(i, 0.0);
        for (std::size_t j = i + 1; j < n; ++j) {
            if (t.has_edge(i, j)) {
                beta.set(i, j, model_bits / (std::min(bandwidth_mbps[i], bandwidth_mbps[j]) * 1e6));
            }
        }
    }
    return beta;
}

RoundTiming round_timing(std::span<const std::size_t> tau, std::span<const double> mu,
                         const SymMatrix& beta, const Topology& t) {
    const std::size_t n = t.size();
    if (tau.size() != n || mu.size() != n || beta.size() != n) {
        throw std::invalid_argument("round_timing: inputs disagree on worker count");
    }
    RoundTiming rt;
    rt.worker_time.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        rt.worker_time[i] = static_cast<double>(tau[i]) * mu[i] + max_link_time(t, beta, i);
        rt.round_time = std::max(rt.round_time, rt.worker_time[i]);
    }
    double wait = 0.0;
    for (double ti : rt.worker_time) wait += rt.round_time - ti;
    rt.waiting_avg = n == 0 ? 0.0 : wait / static_cast<double>(n);
    return rt;
}

}  // namespace fedhp
