#include "formation/graph.hpp"

#include "formation/errors.hpp"

#include <algorithm>
#include <functional>
#include <string>

namespace formation {

FormationGraph::FormationGraph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    std::vector<std::size_t> out(n_, 0);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const Edge& e = edges_[i];
        if (e.origin >= n_ || e.target >= n_)
            throw GraphError("edge " + std::to_string(i + 1) + " references vertex " +
                             std::to_string(std::max(e.origin, e.target) + 1) + " of " + std::to_string(n_));
        if (e.origin == e.target) throw GraphError("edge " + std::to_string(i + 1) + " is a self-loop");
        if (++out[e.origin] > 2)
            throw GraphError("vertex " + std::to_string(e.origin + 1) + " has outvalence above two");
    }
}

FormationGraph FormationGraph::from_one_indexed(std::size_t n,
                                                const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto [a, b] = pairs[i];
        if (a == 0 || b == 0 || a > n || b > n)
            throw GraphError("edge " + std::to_string(i + 1) + " references vertex " +
                             std::to_string((a == 0 || a > n) ? a : b) + " of " + std::to_string(n));
        edges.push_back({a - 1, b - 1});
    }
    return FormationGraph(n, std::move(edges));
}

FormationGraph FormationGraph::two_cycles() { return from_one_indexed(4, {{1, 2}, {2, 3}, {3, 1}, {4, 3}, {1, 4}}); }

FormationGraph FormationGraph::triangle() { return from_one_indexed(3, {{1, 2}, {2, 3}, {3, 1}}); }

std::size_t FormationGraph::outvalence(std::size_t v) const {
    if (v >= n_) throw GraphError("vertex index out of range");
    return static_cast<std::size_t>(
        std::count_if(edges_.begin(), edges_.end(), [v](const Edge& e) { return e.origin == v; }));
}

std::vector<std::size_t> FormationGraph::outgoing(std::size_t v) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < edges_.size(); ++i)
        if (edges_[i].origin == v) out.push_back(i);
    return out;
}

std::optional<std::size_t> FormationGraph::partner(std::size_t i) const {
    for (std::size_t k : outgoing(edge(i).origin))
        if (k != i) return k;
    return std::nullopt;
}

FormationGraph FormationGraph::without_edge(std::size_t i) const {
    std::vector<Edge> edges = edges_;
    edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(i));
    return FormationGraph(n_, std::move(edges));
}

bool FormationGraph::is_two_cycles() const { return *this == two_cycles(); }

num::Matrix mixed_adjacency(const FormationGraph& g) {
    num::Matrix a(g.m(), g.n());
    for (std::size_t i = 0; i < g.m(); ++i) {
        a(i, g.edge(i).origin) = -1.0;
        a(i, g.edge(i).target) = 1.0;
    }
    return a;
}

num::Matrix edge_adjacency(const FormationGraph& g) {
    num::Matrix a(g.m(), g.m());
    for (std::size_t i = 0; i < g.m(); ++i)
        for (std::size_t j = 0; j < g.m(); ++j) {
            if (g.edge(i).origin == g.edge(j).origin)
                a(i, j) = -1.0;
            else if (g.edge(i).target == g.edge(j).origin)
                a(i, j) = 1.0;
        }
    return a;
}

std::size_t outvalence(const FormationGraph& g, std::size_t v) { return g.outvalence(v); }

bool contains_subformation(const FormationGraph& g, const FormationGraph& h) {
    if (h.n() > g.n() || h.m() > g.m()) return false;
    std::vector<std::size_t> image(h.n());
    std::vector<bool> used(g.n(), false);

    auto check = [&]() {
        // Every h-edge must map to a distinct g-edge.
        std::vector<bool> g_used(g.m(), false);
        for (const Edge& e : h.edges()) {
            const Edge mapped{image[e.origin], image[e.target]};
            bool hit = false;
            for (std::size_t k = 0; k < g.m(); ++k)
                if (!g_used[k] && g.edge(k) == mapped) {
                    g_used[k] = hit = true;
                    break;
                }
            if (!hit) return false;
        }
        // Closure: every g-edge leaving an image vertex is covered.
        for (std::size_t k = 0; k < g.m(); ++k)
            if (used[g.edge(k).origin] && !g_used[k]) return false;
        return true;
    };

    std::function<bool(std::size_t)> assign = [&](std::size_t v) -> bool {
        if (v == h.n()) return check();
        for (std::size_t gv = 0; gv < g.n(); ++gv) {
            if (used[gv]) continue;
            // Outgoing-edge counts must agree under the closure rule.
            if (g.outvalence(gv) != h.outvalence(v)) continue;
            used[gv] = true;
            image[v] = gv;
            if (assign(v + 1)) return true;
            used[gv] = false;
        }
        return false;
    };
    return assign(0);
}

bool is_subformation(const FormationGraph& g, const std::vector<std::size_t>& vertices,
                     const std::vector<std::size_t>& edges) {
    std::vector<bool> in_v(g.n(), false), in_e(g.m(), false);
    for (std::size_t v : vertices) in_v.at(v) = true;
    for (std::size_t e : edges) in_e.at(e) = true;
    for (std::size_t k = 0; k < g.m(); ++k) {
        const Edge& e = g.edge(k);
        if (in_e[k] && !(in_v[e.origin] && in_v[e.target])) return false;
        if (in_v[e.origin] && !in_e[k]) return false;
    }
    return true;
}

bool admits_subformation(const FormationGraph& g, const std::vector<std::size_t>& vertices) {
    std::vector<std::size_t> closure;
    for (std::size_t k = 0; k < g.m(); ++k)
        if (std::find(vertices.begin(), vertices.end(), g.edge(k).origin) != vertices.end()) closure.push_back(k);
    return is_subformation(g, vertices, closure);
}

AdjacencyBundle adjacency_bundle(const FormationGraph& g) {
    AdjacencyBundle b{mixed_adjacency(g), edge_adjacency(g), {}};
    b.mixed2 = num::kron_I2(b.mixed);
    return b;
}

}  // namespace formation
