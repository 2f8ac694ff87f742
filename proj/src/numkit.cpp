#include "fedhp/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fedhp {

double l2_norm(std::span<const double> v) {
    double sum = 0.0;
    for (double x : v) sum += x * x;
    return std::sqrt(sum);
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("l2_distance: length mismatch");
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

SymMatrix::SymMatrix(std::size_t n, double fill) : n_(n), data_(n * n, fill) {}

SymMatrix SymMatrix::from_dense(std::size_t n, std::span<const double> rows) {
    if (rows.size() != n * n) throw std::invalid_argument("SymMatrix: expected n*n entries");
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = rows[i * n + j];
            if (!std::isfinite(v)) throw std::invalid_argument("SymMatrix: non-finite entry");
            if (v != rows[j * n + i]) {
                throw std::invalid_argument("SymMatrix: entry (" + std::to_string(i) + "," +
                                            std::to_string(j) + ") breaks symmetry");
            }
            m.data_[i * n + j] = v;
        }
    }
    return m;
}

SymMatrix SymMatrix::identity(std::size_t n) {
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.data_[i * n + i] = 1.0;
    return m;
}

void SymMatrix::set(std::size_t i, std::size_t j, double value) {
    data_[i * n_ + j] = value;
    data_[j * n_ + i] = value;
}

std::span<const double> SymMatrix::row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * n_, n_);
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < n_; ++i) t += data_[i * n_ + i];
    return t;
}

std::vector<double> sym_eigenvalues(const SymMatrix& m) {
    constexpr double kOffDiagTol = 1e-10;
    constexpr int kMaxSweeps = 100;

    const std::size_t n = m.size();
    if (!all_finite(m.data())) throw std::invalid_argument("sym_eigenvalues: non-finite input");
    std::vector<double> a(m.data().begin(), m.data().end());
    auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

    auto max_off = [&] {
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) best = std::max(best, std::abs(at(i, j)));
        return best;
    };

    for (int sweep = 0; sweep < kMaxSweeps && max_off() > kOffDiagTol; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (std::abs(apq) <= kOffDiagTol * 1e-3) continue;
                const double app = at(p, p);
                const double aqq = at(q, q);
                // Rotation angle zeroing a(p, q); stable tangent form.
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = at(k, p);
                    const double akq = at(k, q);
                    const double new_kp = c * akp - s * akq;
                    const double new_kq = s * akp + c * akq;
                    at(k, p) = at(p, k) = new_kp;
                    at(k, q) = at(q, k) = new_kq;
                }
                at(p, p) = app - t * apq;
                at(q, q) = aqq + t * apq;
                at(p, q) = at(q, p) = 0.0;
            }
        }
    }

    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = at(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t stream_id(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t state = a;
    std::uint64_t h = splitmix64(state);
    state = h ^ b;
    h = splitmix64(state);
    state = h ^ c;
    return splitmix64(state);
}

namespace {
constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    std::uint64_t state = seed;
    const std::uint64_t mixed = splitmix64(state) ^ (stream * 0xD1B54A32D192ED03ULL);
    state = mixed;
    for (auto& word : s_) word = splitmix64(state);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % bound;
}

double Rng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::normal(double mean, double stddev) { return mean + stddev * normal(); }

Rng Rng::derive(std::uint64_t stream) const {
    return Rng(stream_id(s_[0] ^ s_[2], s_[1] ^ s_[3], seed_), stream);
}

}  // namespace fedhp
