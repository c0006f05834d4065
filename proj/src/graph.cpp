#include "dra/graph.hpp"

#include <algorithm>
#include <queue>
#include <string>
#include <utility>

#include "dra/errors.hpp"

namespace dra {

std::vector<std::pair<std::size_t, std::size_t>> StrategyGraph::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t k = 0; k < n_nodes; ++k) {
        for (std::size_t j = k + 1; j < n_nodes; ++j) {
            if (adjacency[k][j] != 0) out.emplace_back(k, j);
        }
    }
    return out;
}

std::size_t StrategyGraph::max_degree() const {
    std::size_t best = 0;
    for (const auto& row : adjacency) {
        best = std::max<std::size_t>(best, static_cast<std::size_t>(std::count(row.begin(), row.end(), 1)));
    }
    return best;
}

StrategyGraph graph_from_adjacency(std::vector<std::vector<int>> adjacency) {
    const std::size_t n = adjacency.size();
    if (n < 2) throw SizeError("strategy graph needs at least 2 nodes");
    for (const auto& row : adjacency) {
        if (row.size() != n) throw ShapeError("adjacency matrix is not square");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (adjacency[k][k] != 0) throw RangeError("adjacency has a self loop at node " + std::to_string(k));
        for (std::size_t j = 0; j < n; ++j) {
            const int a = adjacency[k][j];
            if (a != 0 && a != 1) throw RangeError("adjacency entries must be 0 or 1");
            if (a != adjacency[j][k]) throw RangeError("adjacency matrix is not symmetric");
        }
    }

    StrategyGraph g;
    g.n_nodes = n;
    g.laplacian.assign(n, Vector(n, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
        double degree = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (adjacency[k][j] != 0) {
                g.laplacian[k][j] = -1.0;
                degree += 1.0;
            }
        }
        g.laplacian[k][k] = degree;
    }
    g.adjacency = std::move(adjacency);
    return g;
}

StrategyGraph ring_graph(std::size_t n) {
    if (n < 2) throw SizeError("ring_graph needs n >= 2, got " + std::to_string(n));
    std::vector<std::vector<int>> a(n, std::vector<int>(n, 0));
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t next = (k + 1) % n;
        a[k][next] = 1;
        a[next][k] = 1;
    }
    return graph_from_adjacency(std::move(a));
}

StrategyGraph complete_graph(std::size_t n) {
    if (n < 2) throw SizeError("complete_graph needs n >= 2, got " + std::to_string(n));
    std::vector<std::vector<int>> a(n, std::vector<int>(n, 1));
    for (std::size_t k = 0; k < n; ++k) a[k][k] = 0;
    return graph_from_adjacency(std::move(a));
}

StrategyGraph make_graph(Topology t, std::size_t n) {
    return t == Topology::Ring ? ring_graph(n) : complete_graph(n);
}

bool is_connected(const StrategyGraph& g) {
    if (g.n_nodes == 0) return false;
    std::vector<bool> seen(g.n_nodes, false);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    seen[0] = true;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        const std::size_t k = frontier.front();
        frontier.pop();
        for (std::size_t j = 0; j < g.n_nodes; ++j) {
            if (g.adjacency[k][j] != 0 && !seen[j]) {
                seen[j] = true;
                ++reached;
                frontier.push(j);
            }
        }
    }
    return reached == g.n_nodes;
}

double quadratic_form(const StrategyGraph& g, std::span<const double> v) {
    if (v.size() != g.n_nodes) {
        throw ShapeError("quadratic_form: vector has " + std::to_string(v.size()) +
                         " entries, graph has " + std::to_string(g.n_nodes));
    }
    double sum = 0.0;
    for (auto [k, j] : g.edges()) {
        const double d = v[k] - v[j];
        sum += d * d;
    }
    return sum;
}

}  // namespace dra
