#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fedhp/numkit.hpp"

namespace fedhp {

using Edge = std::pair<std::size_t, std::size_t>;

// Undirected simple graph over N workers as a symmetric 0/1 adjacency
// matrix with zero diagonal.
class Topology {
public:
    Topology() = default;
    explicit Topology(std::size_t n);

    static Topology full(std::size_t n);
    static Topology ring(std::size_t n);
    static Topology star(std::size_t n);
    static Topology from_edges(std::size_t n, const std::vector<Edge>& edges);

    // Edge-list text: one "i j" pair per line, 0-indexed. Blank lines and
    // lines starting with '#' are skipped. n is one more than the largest
    // index seen unless given explicitly.
    static Topology parse_edge_list(std::istream& in, std::size_t n = 0);
    static Topology load_edge_list(const std::string& path, std::size_t n = 0);
    void write_edge_list(std::ostream& out) const;

    std::size_t size() const { return n_; }
    bool has_edge(std::size_t i, std::size_t j) const { return adj_[i * n_ + j] != 0; }
    void add_edge(std::size_t i, std::size_t j);
    void remove_edge(std::size_t i, std::size_t j);

    std::size_t degree(std::size_t i) const;
    std::size_t max_degree() const;
    std::vector<std::size_t> neighbors(std::size_t i) const;
    // Undirected links, each once with first < second, lexicographic order.
    std::vector<Edge> edges() const;
    std::size_t link_count() const;

    bool operator==(const Topology&) const = default;

private:
    void check_pair(std::size_t i, std::size_t j) const;

    std::size_t n_ = 0;
    std::vector<unsigned char> adj_;
};

// L = D - A.
SymMatrix laplacian(const Topology& t);

// Breadth-first reachability from node 0.
bool is_connected(const Topology& t);

struct MixingPlan {
    std::size_t u_max = 0;
    double weight = 1.0;  // 1 / (u_max + 1)
    SymMatrix W;          // I - weight * L
};

MixingPlan mixing_plan(const Topology& t);

struct SpectralSummary {
    double lambda2_laplacian = 0.0;
    double rho = 0.0;  // largest |eigenvalue| of W after removing the Perron eigenvalue 1
    std::vector<double> laplacian_eigenvalues;
    std::vector<double> mixing_eigenvalues;
};

// A unit eigenvalue of W with multiplicity above one means a disconnected
// graph; rho is then reported as 1.
SpectralSummary spectral_summary(const Topology& t);

}  // namespace fedhp
