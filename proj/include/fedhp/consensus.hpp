#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "fedhp/graphtopo.hpp"

namespace fedhp {

// Pairwise consensus distances held by the coordinator.
//
// Each round starts with begin_round(); workers then report the distances
// they measured to their neighbours, and estimate_unobserved() fills every
// other pair from shortest paths over the measured ones, smoothed with an
// exponential moving average against the previous round's value.
class DistanceLedger {
public:
    explicit DistanceLedger(std::size_t n, double beta1 = 0.5);

    std::size_t size() const { return n_; }
    double beta1() const { return beta1_; }

    void begin_round();
    // Sets D(i, j) = D(j, i) = dist. Rejects i == j and negative or
    // non-finite distances.
    void record_observed(std::size_t i, std::size_t j, double dist);
    bool observed(std::size_t i, std::size_t j) const { return observed_[i * n_ + j] != 0; }

    // Throws std::runtime_error if the measured pairs do not connect all
    // workers.
    void estimate_unobserved();

    double distance(std::size_t i, std::size_t j) const { return dist_[i * n_ + j]; }
    // Raw shortest-path estimates from the last estimate_unobserved() call,
    // before smoothing. Measured pairs keep their measured value here too.
    double shortest_path(std::size_t i, std::size_t j) const { return shortest_[i * n_ + j]; }

    // Seed or overwrite an entry with history, e.g. to replay a trace.
    void set_distance(std::size_t i, std::size_t j, double dist);

    // CSV rows "i,j,distance,observed" for i < j.
    void write_csv(std::ostream& out) const;

private:
    std::size_t n_;
    double beta1_;
    std::vector<double> dist_;
    std::vector<double> shortest_;
    std::vector<unsigned char> observed_;
    std::vector<unsigned char> has_history_;
};

// (1/N) * sum_{j != i} (1 - a_ij) * D_ij.
double worker_bound(const DistanceLedger& ledger, const Topology& t, std::size_t i);

// Mean of worker_bound over all workers, i.e.
// (1/N^2) * sum_i sum_j (1 - a_ij) * D_ij.
double average_bound(const DistanceLedger& ledger, const Topology& t);

// Adaptive ceiling on the average bound, tracked as an EMA of the mean
// local-update norm. The first observation seeds the value.
struct ThresholdState {
    double d_max = 0.0;
    double beta2 = 0.1;
    bool initialized = false;
};

ThresholdState update_threshold(ThresholdState ts, double avg_update_norm);

}  // namespace fedhp
