#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dra/model.hpp"

namespace dra {

/// Undirected, unweighted communication graph over one PEV's strategy nodes.
struct StrategyGraph {
    std::size_t n_nodes = 0;
    std::vector<std::vector<int>> adjacency;  // symmetric 0/1, zero diagonal
    Matrix laplacian;                         // degree - adjacency

    /// Edge list (k < j), in row order.
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;
    std::size_t max_degree() const;
};

/// Builds the graph from an adjacency matrix. Throws SizeError / ShapeError /
/// RangeError if the matrix is not a valid undirected simple graph.
StrategyGraph graph_from_adjacency(std::vector<std::vector<int>> adjacency);

/// Cycle 0-1-...-(n-1)-0; a single edge for n = 2. Throws SizeError for n < 2.
StrategyGraph ring_graph(std::size_t n);

StrategyGraph complete_graph(std::size_t n);

StrategyGraph make_graph(Topology t, std::size_t n);

/// Breadth-first reachability from node 0.
bool is_connected(const StrategyGraph& g);

/// v' L v evaluated as the sum of squared differences over edges.
double quadratic_form(const StrategyGraph& g, std::span<const double> v);

}  // namespace dra
