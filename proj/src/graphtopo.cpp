#include "fedhp/graphtopo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace fedhp {

Topology::Topology(std::size_t n) : n_(n), adj_(n * n, 0) {}

Topology Topology::full(std::size_t n) {
    Topology t(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) t.add_edge(i, j);
    return t;
}

Topology Topology::ring(std::size_t n) {
    Topology t(n);
    if (n < 2) return t;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        if (i != j) t.add_edge(i, j);
    }
    return t;
}

Topology Topology::star(std::size_t n) {
    Topology t(n);
    for (std::size_t i = 1; i < n; ++i) t.add_edge(0, i);
    return t;
}

Topology Topology::from_edges(std::size_t n, const std::vector<Edge>& edges) {
    Topology t(n);
    for (const auto& [i, j] : edges) t.add_edge(i, j);
    return t;
}

Topology Topology::parse_edge_list(std::istream& in, std::size_t n) {
    std::vector<Edge> edges;
    std::size_t max_index = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        long long i = -1, j = -1;
        std::string extra;
        if (!(ls >> i >> j) || (ls >> extra) || i < 0 || j < 0) {
            throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                                        ": expected two non-negative indices");
        }
        edges.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        max_index = std::max({max_index, edges.back().first, edges.back().second});
    }
    if (n == 0) n = edges.empty() ? 0 : max_index + 1;
    return from_edges(n, edges);
}

Topology Topology::load_edge_list(const std::string& path, std::size_t n) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open edge list '" + path + "'");
    return parse_edge_list(in, n);
}

void Topology::write_edge_list(std::ostream& out) const {
    for (const auto& [i, j] : edges()) out << i << ' ' << j << '\n';
}

void Topology::check_pair(std::size_t i, std::size_t j) const {
    if (i >= n_ || j >= n_) throw std::out_of_range("Topology: node index out of range");
    if (i == j) throw std::invalid_argument("Topology: self-loops are not allowed");
}

void Topology::add_edge(std::size_t i, std::size_t j) {
    check_pair(i, j);
    adj_[i * n_ + j] = adj_[j * n_ + i] = 1;
}

void Topology::remove_edge(std::size_t i, std::size_t j) {
    check_pair(i, j);
    adj_[i * n_ + j] = adj_[j * n_ + i] = 0;
}

std::size_t Topology::degree(std::size_t i) const {
    std::size_t d = 0;
    for (std::size_t j = 0; j < n_; ++j) d += adj_[i * n_ + j];
    return d;
}

std::size_t Topology::max_degree() const {
    std::size_t best = 0;
    for (std::size_t i = 0; i < n_; ++i) best = std::max(best, degree(i));
    return best;
}

std::vector<std::size_t> Topology::neighbors(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < n_; ++j)
        if (adj_[i * n_ + j]) out.push_back(j);
    return out;
}

std::vector<Edge> Topology::edges() const {
    std::vector<Edge> out;
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j)
            if (adj_[i * n_ + j]) out.emplace_back(i, j);
    return out;
}

std::size_t Topology::link_count() const {
    std::size_t c = 0;
    for (unsigned char a : adj_) c += a;
    return c / 2;
}

SymMatrix laplacian(const Topology& t) {
    SymMatrix L(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        L.set_diagonal(i, static_cast<double>(t.degree(i)));
        for (std::size_t j = i + 1; j < t.size(); ++j)
            if (t.has_edge(i, j)) L.set(i, j, -1.0);
    }
    return L;
}

bool is_connected(const Topology& t) {
    const std::size_t n = t.size();
    if (n <= 1) return true;
    std::vector<char> seen(n, 0);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        const std::size_t u = frontier.front();
        frontier.pop();
        for (std::size_t v = 0; v < n; ++v) {
            if (!seen[v] && t.has_edge(u, v)) {
                seen[v] = 1;
                ++reached;
                frontier.push(v);
            }
        }
    }
    return reached == n;
}

MixingPlan mixing_plan(const Topology& t) {
    MixingPlan plan;
    plan.u_max = t.max_degree();
    plan.weight = 1.0 / static_cast<double>(plan.u_max + 1);
    const std::size_t n = t.size();
    plan.W = SymMatrix(n);
    for (std::size_t i = 0; i < n; ++i) {
        plan.W.set_diagonal(i, 1.0 - static_cast<double>(t.degree(i)) * plan.weight);
        for (std::size_t j = i + 1; j < n; ++j)
            if (t.has_edge(i, j)) plan.W.set(i, j, plan.weight);
    }
    return plan;
}

SpectralSummary spectral_summary(const Topology& t) {
    constexpr double kUnitTol = 1e-8;
    SpectralSummary s;
    s.laplacian_eigenvalues = sym_eigenvalues(laplacian(t));
    s.mixing_eigenvalues = sym_eigenvalues(mixing_plan(t).W);
    const std::size_t n = t.size();
    if (n <= 1) return s;

    s.lambda2_laplacian = s.laplacian_eigenvalues[1];

    const auto unit_count = std::count_if(s.mixing_eigenvalues.begin(), s.mixing_eigenvalues.end(),
                                          [](double v) { return std::abs(v - 1.0) <= kUnitTol; });
    if (unit_count > 1) {
        s.rho = 1.0;
        return s;
    }
    // Drop the eigenvalue closest to 1 (the all-ones direction).
    auto rest = s.mixing_eigenvalues;
    const auto perron = std::min_element(rest.begin(), rest.end(), [](double a, double b) {
        return std::abs(a - 1.0) < std::abs(b - 1.0);
    });
    rest.erase(perron);
    for (double v : rest) s.rho = std::max(s.rho, std::abs(v));
    return s;
}

}  // namespace fedhp
