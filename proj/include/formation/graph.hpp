#pragma once

#include "formation/numkernel.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace formation {

/// Directed edge: the origin agent measures the relative position of the
/// target agent (its co-leader). Indices are 0-based.
struct Edge {
    std::size_t origin = 0;
    std::size_t target = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Directed information-flow graph with ordered vertices and ordered edges.
/// Edge identity is its list position. Every vertex has outvalence <= 2.
class FormationGraph {
public:
    FormationGraph(std::size_t n, std::vector<Edge> edges);

    /// Build from 1-indexed pairs as written in scenario files and figures.
    static FormationGraph from_one_indexed(std::size_t n,
                                           const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

    /// Four agents, edges 1->2, 2->3, 3->1, 4->3, 1->4 (in that order).
    static FormationGraph two_cycles();
    static FormationGraph triangle();

    std::size_t n() const noexcept { return n_; }
    std::size_t m() const noexcept { return edges_.size(); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Edge& edge(std::size_t i) const { return edges_.at(i); }

    std::size_t outvalence(std::size_t v) const;
    /// Outgoing edge indices of `v`, in edge order.
    std::vector<std::size_t> outgoing(std::size_t v) const;
    /// The other edge leaving the origin of edge `i`, if its origin has outvalence two.
    std::optional<std::size_t> partner(std::size_t i) const;

    /// Same graph with edge `i` removed.
    FormationGraph without_edge(std::size_t i) const;

    bool is_two_cycles() const;

    friend bool operator==(const FormationGraph&, const FormationGraph&) = default;

private:
    std::size_t n_ = 0;
    std::vector<Edge> edges_;
};

/// m x n: -1 at (i, origin(e_i)), +1 at (i, target(e_i)).
num::Matrix mixed_adjacency(const FormationGraph& g);

/// m x m: -1 where e_i and e_j share their origin (so the diagonal is -1),
/// +1 where e_i ends at the origin of e_j, 0 otherwise.
num::Matrix edge_adjacency(const FormationGraph& g);

std::size_t outvalence(const FormationGraph& g, std::size_t v);

/// True iff some injection of h's vertices into g maps every edge of h onto
/// an edge of g, and every g-edge leaving the image vertex set is the image
/// of an h-edge.
bool contains_subformation(const FormationGraph& g, const FormationGraph& h);

/// True iff the vertex set and edge subset (0-based) form a subformation of
/// g: edges lie inside the vertex set and include every g-edge leaving it.
bool is_subformation(const FormationGraph& g, const std::vector<std::size_t>& vertices,
                     const std::vector<std::size_t>& edges);

/// True iff some edge subset makes `vertices` a subformation, i.e. no edge
/// leaves the set.
bool admits_subformation(const FormationGraph& g, const std::vector<std::size_t>& vertices);

struct AdjacencyBundle {
    num::Matrix mixed;     // m x n
    num::Matrix edge_adj;  // m x m
    num::Matrix mixed2;    // 2m x 2n
};

AdjacencyBundle adjacency_bundle(const FormationGraph& g);

}  // namespace formation
