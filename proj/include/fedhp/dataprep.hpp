#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "fedhp/learncore.hpp"

namespace fedhp {

// Gaussian class clusters. Class means have i.i.d. N(0, separation^2 / F)
// coordinates and samples add i.i.d. N(0, spread^2 / F) noise, so mean norms
// are about `separation` and noise norms about `spread`.
struct SyntheticSpec {
    std::size_t classes = 10;
    std::size_t features = 32;
    std::size_t samples_per_class = 300;
    double cluster_spread = 1.0;
    double separation = 1.0;
    std::uint64_t seed = 1;
};

struct SplitData {
    Dataset train;
    Dataset test;
};

// 80/20 train/test split per class.
SplitData generate(const SyntheticSpec& spec);

// Thrown when a shard would be empty.
class SizingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PartitionSpec {
    double p = 0.1;  // non-IID level: share of each class held by its group
    std::size_t workers = 1;
    std::size_t group_size = 3;
};

// Workers owning the concentrated share of `cls`:
// {g*c, g*c+1, ..., g*c+g-1} mod N with g = min(group_size, N).
std::vector<std::size_t> class_group(std::size_t cls, const PartitionSpec& spec);

// Splits train into spec.workers disjoint shards covering every sample once.
// For each class, round(p * n_c) shuffled samples are dealt round-robin to
// the class group and the rest round-robin to every other worker. When the
// group spans all workers the remainder goes to the group as well.
std::vector<Dataset> partition(const Dataset& train, const PartitionSpec& spec, Rng& rng);

// One row per sample: f0,...,f{F-1},label,worker_id.
void write_shards_csv(std::ostream& out, const std::vector<Dataset>& shards);

}  // namespace fedhp
