#include "fedhp/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace fedhp {

DistanceLedger::DistanceLedger(std::size_t n, double beta1)
    : n_(n),
      beta1_(beta1),
      dist_(n * n, 0.0),
      shortest_(n * n, 0.0),
      observed_(n * n, 0),
      has_history_(n * n, 0) {
    if (!(beta1 >= 0.0 && beta1 <= 1.0)) throw std::invalid_argument("DistanceLedger: beta1 must lie in [0, 1]");
}

void DistanceLedger::begin_round() { std::fill(observed_.begin(), observed_.end(), 0); }

void DistanceLedger::record_observed(std::size_t i, std::size_t j, double dist) {
    if (i >= n_ || j >= n_) throw std::out_of_range("record_observed: index out of range");
    if (i == j) throw std::invalid_argument("record_observed: i == j");
    if (!std::isfinite(dist) || dist < 0.0) {
        throw std::invalid_argument("record_observed: distance must be finite and non-negative");
    }
    dist_[i * n_ + j] = dist_[j * n_ + i] = dist;
    observed_[i * n_ + j] = observed_[j * n_ + i] = 1;
}

void DistanceLedger::set_distance(std::size_t i, std::size_t j, double dist) {
    if (i == j || !std::isfinite(dist) || dist < 0.0) throw std::invalid_argument("set_distance: bad entry");
    dist_[i * n_ + j] = dist_[j * n_ + i] = dist;
    has_history_[i * n_ + j] = has_history_[j * n_ + i] = 1;
}

void DistanceLedger::estimate_unobserved() {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const std::size_t n = n_;
    auto& sp = shortest_;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t k = i * n + j;
            sp[k] = i == j ? 0.0 : (observed_[k] ? dist_[k] : kInf);
        }
    }
    // Floyd-Warshall over the measured-distance graph.
    for (std::size_t via = 0; via < n; ++via) {
        for (std::size_t i = 0; i < n; ++i) {
            const double d_iv = sp[i * n + via];
            if (d_iv == kInf) continue;
            for (std::size_t j = 0; j < n; ++j) {
                const double cand = d_iv + sp[via * n + j];
                if (cand < sp[i * n + j]) sp[i * n + j] = cand;
            }
        }
    }
    for (double v : sp) {
        if (v == kInf) throw std::runtime_error("estimate_unobserved: measured pairs do not connect all workers");
    }

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t k = i * n + j;
            if (i == j) continue;
            if (!observed_[k]) {
                dist_[k] = has_history_[k] ? (1.0 - beta1_) * dist_[k] + beta1_ * sp[k] : sp[k];
            }
            has_history_[k] = 1;
        }
    }
}

void DistanceLedger::write_csv(std::ostream& out) const {
    char buf[32];
    out << "i,j,distance,observed\n";
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            std::snprintf(buf, sizeof buf, "%.9g", distance(i, j));
            out << i << ',' << j << ',' << buf << ',' << (observed(i, j) ? 1 : 0) << '\n';
        }
    }
}

double worker_bound(const DistanceLedger& ledger, const Topology& t, std::size_t i) {
    const std::size_t n = ledger.size();
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j != i && !t.has_edge(i, j)) sum += ledger.distance(i, j);
    }
    return sum / static_cast<double>(n);
}

double average_bound(const DistanceLedger& ledger, const Topology& t) {
    const std::size_t n = ledger.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += worker_bound(ledger, t, i);
    return sum / static_cast<double>(n);
}

ThresholdState update_threshold(ThresholdState ts, double avg_update_norm) {
    if (!std::isfinite(avg_update_norm) || avg_update_norm < 0.0) {
        throw std::invalid_argument("update_threshold: average update norm must be finite and non-negative");
    }
    if (!ts.initialized) {
        ts.d_max = avg_update_norm;
        ts.initialized = true;
    } else {
        ts.d_max = (1.0 - ts.beta2) * ts.d_max + ts.beta2 * avg_update_norm;
    }
    return ts;
}

}  // namespace fedhp
