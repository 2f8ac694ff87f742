#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace fedhp {

// Dense real vector: model parameters (length d) or per-worker quantities
// (length N).
using Vec = std::vector<double>;

// A model or aggregate became non-finite (typically a learning rate that is
// too large).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double l2_norm(std::span<const double> v);
double l2_distance(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> v);

// Square symmetric matrix stored row-major. Writes through set() keep
// entry(i, j) == entry(j, i) bit-exact.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t n, double fill = 0.0);

    // Validates symmetry (exact) and finiteness of a row-major n*n buffer.
    static SymMatrix from_dense(std::size_t n, std::span<const double> rows);
    static SymMatrix identity(std::size_t n);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double value);
    void set_diagonal(std::size_t i, double value) { data_[i * n_ + i] = value; }

    std::span<const double> data() const { return data_; }
    std::span<const double> row(std::size_t i) const;
    double trace() const;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

// Ascending eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
// Iterates until every off-diagonal magnitude is below 1e-10 or 100 sweeps
// have run. Throws std::invalid_argument on non-finite input.
std::vector<double> sym_eigenvalues(const SymMatrix& m);

// xoshiro256** seeded through splitmix64.
//
// A generator is identified by (seed, stream): distinct stream ids give
// statistically independent sequences for the same seed, so each worker,
// link or round can own its own stream. All derived draws (uniform, normal,
// integer ranges, shuffles) are implemented here rather than through
// <random> distributions, whose outputs are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();
    // Uniform in [0, 1) with 53 bits of precision.
    double uniform();
    double uniform(double lo, double hi);
    // Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);
    // Standard normal via Box-Muller; one draw consumes two uniforms.
    double normal();
    double normal(double mean, double stddev);

    // New generator keyed on the current state and a stream id. Does not
    // advance this generator.
    Rng derive(std::uint64_t stream) const;

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);
// Order-sensitive combination of stream components, e.g. (round, worker).
std::uint64_t stream_id(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

}  // namespace fedhp
