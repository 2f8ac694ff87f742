#include "fedhp/dataprep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace fedhp {

namespace {
constexpr std::uint64_t kMeansStream = 1;
constexpr std::uint64_t kSamplesStream = 2;
}  // namespace

SplitData generate(const SyntheticSpec& spec) {
    if (spec.classes < 2 || spec.features == 0 || spec.samples_per_class < 2) {
        throw std::invalid_argument("generate: need classes >= 2, features >= 1, samples_per_class >= 2");
    }
    if (!(spec.cluster_spread >= 0.0) || !(spec.separation > 0.0)) {
        throw std::invalid_argument("generate: spread must be >= 0 and separation > 0");
    }
    const std::size_t F = spec.features;
    const double root_f = std::sqrt(static_cast<double>(F));

    Rng mean_rng(spec.seed, kMeansStream);
    std::vector<Vec> means(spec.classes, Vec(F));
    for (auto& m : means)
        for (double& v : m) v = mean_rng.normal() * spec.separation / root_f;

    SplitData out;
    out.train.features = out.test.features = F;
    out.train.classes = out.test.classes = spec.classes;

    const std::size_t n_train = (spec.samples_per_class * 4) / 5;
    Rng sample_rng(spec.seed, kSamplesStream);
    Vec row(F);
    for (std::size_t c = 0; c < spec.classes; ++c) {
        for (std::size_t s = 0; s < spec.samples_per_class; ++s) {
            for (std::size_t f = 0; f < F; ++f) {
                row[f] = means[c][f] + sample_rng.normal() * spec.cluster_spread / root_f;
            }
            (s < n_train ? out.train : out.test).push_back(row, static_cast<int>(c));
        }
    }
    return out;
}

std::vector<std::size_t> class_group(std::size_t cls, const PartitionSpec& spec) {
    const std::size_t g = std::min(spec.group_size, spec.workers);
    std::vector<std::size_t> group;
    for (std::size_t k = 0; k < g; ++k) group.push_back((g * cls + k) % spec.workers);
    return group;
}

std::vector<Dataset> partition(const Dataset& train, const PartitionSpec& spec, Rng& rng) {
    const std::size_t N = spec.workers;
    if (N == 0 || spec.group_size == 0) throw std::invalid_argument("partition: workers and group_size must be >= 1");
    if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw std::invalid_argument("partition: p must lie in [0, 1]");

    std::vector<std::vector<std::size_t>> by_class(train.classes);
    for (std::size_t r = 0; r < train.size(); ++r) by_class[static_cast<std::size_t>(train.y[r])].push_back(r);

    std::vector<std::vector<std::size_t>> assigned(N);
    std::size_t rotation = 0;
    for (std::size_t c = 0; c < train.classes; ++c) {
        auto rows = by_class[c];
        rng.shuffle(rows);
        const auto group = class_group(c, spec);
        std::vector<std::size_t> others;
        for (std::size_t w = 0; w < N; ++w) {
            if (std::find(group.begin(), group.end(), w) == group.end()) others.push_back(w);
        }
        const auto concentrated = others.empty()
                                      ? rows.size()
                                      : static_cast<std::size_t>(std::llround(spec.p * static_cast<double>(rows.size())));
        for (std::size_t k = 0; k < concentrated; ++k) assigned[group[k % group.size()]].push_back(rows[k]);
        // The deal start rotates across classes so that total shard sizes stay balanced.
        for (std::size_t k = concentrated; k < rows.size(); ++k) {
            assigned[others[(rotation + k - concentrated) % others.size()]].push_back(rows[k]);
        }
        if (!others.empty()) rotation = (rotation + rows.size() - concentrated) % others.size();
    }

    std::vector<Dataset> shards(N);
    for (std::size_t w = 0; w < N; ++w) {
        if (assigned[w].empty()) {
            throw SizingError("partition: worker " + std::to_string(w) +
                              " received no samples; enlarge the dataset or lower p");
        }
        std::sort(assigned[w].begin(), assigned[w].end());
        shards[w].features = train.features;
        shards[w].classes = train.classes;
        for (std::size_t r : assigned[w]) shards[w].push_back(train.row(r), train.y[r]);
    }
    return shards;
}

void write_shards_csv(std::ostream& out, const std::vector<Dataset>& shards) {
    if (shards.empty()) return;
    const std::size_t F = shards.front().features;
    for (std::size_t f = 0; f < F; ++f) out << 'f' << f << ',';
    out << "label,worker_id\n";
    char buf[32];
    for (std::size_t w = 0; w < shards.size(); ++w) {
        const auto& s = shards[w];
        for (std::size_t r = 0; r < s.size(); ++r) {
            for (double v : s.row(r)) {
                std::snprintf(buf, sizeof buf, "%.9g", v);
                out << buf << ',';
            }
            out << s.y[r] << ',' << w << '\n';
        }
    }
}

}  // namespace fedhp
