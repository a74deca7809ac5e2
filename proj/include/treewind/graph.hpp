/**
 * Simple undirected graphs for accumulated homology of random walks:
 * the lazy simple random walk, spanning trees and their complement edges.
 */
#pragma once

#include <algorithm>
#include <cstddef>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "error.hpp"
#include "markov.hpp"

namespace treewind {

class SimpleGraph {
public:
    explicit SimpleGraph(std::size_t vertices = 0) : adj_(vertices) {}

    static SimpleGraph complete(std::size_t n)
    {
        SimpleGraph g(n);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b)
                g.add_edge(a, b);
        return g;
    }

    void add_edge(std::size_t a, std::size_t b)
    {
        if (a == b || a >= adj_.size() || b >= adj_.size())
            throw Error("invalid_argument", "self-loop or vertex out of range");
        if (adjacent(a, b))
            return;
        adj_[a].insert(b);
        adj_[b].insert(a);
        edges_.emplace_back(std::min(a, b), std::max(a, b));
    }

    std::size_t vertex_count() const { return adj_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    bool adjacent(std::size_t a, std::size_t b) const { return adj_.at(a).count(b) > 0; }
    const std::set<std::size_t>& neighbors(std::size_t v) const { return adj_.at(v); }
    const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }

    bool connected() const
    {
        if (adj_.empty())
            return true;
        std::vector<char> seen(adj_.size(), 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!stack.empty())
        {
            const std::size_t v = stack.back();
            stack.pop_back();
            for (std::size_t w : adj_[v])
                if (!seen[w])
                {
                    seen[w] = 1;
                    ++count;
                    stack.push_back(w);
                }
        }
        return count == adj_.size();
    }

private:
    std::vector<std::set<std::size_t>> adj_;
    std::vector<std::pair<std::size_t, std::size_t>> edges_;
};

/// Lazy simple random walk: coin, then a uniform edge; moves along it if incident.
inline FiniteChain lazy_walk(const SimpleGraph& g)
{
    const Eigen::Index n = static_cast<Eigen::Index>(g.vertex_count());
    const double move = 1.0 / (2.0 * static_cast<double>(g.edge_count()));
    Matrix P = Matrix::Zero(n, n);
    for (const auto& [a, b] : g.edges())
    {
        P(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += move;
        P(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) += move;
    }
    for (Eigen::Index i = 0; i < n; ++i)
        P(i, i) = 1.0 - P.row(i).sum();
    return FiniteChain(std::move(P));
}

/// A spanning tree given as parent pointers (root has itself as parent).
struct SpanningTree {
    std::size_t root = 0;
    std::vector<std::size_t> parent;
    std::vector<std::size_t> depth;

    bool contains(std::size_t a, std::size_t b) const
    {
        return (parent[a] == b && a != root) || (parent[b] == a && b != root);
    }

    /// Vertices on the tree path from a to b, both included.
    std::vector<std::size_t> path(std::size_t a, std::size_t b) const
    {
        std::vector<std::size_t> up, down;
        while (depth[a] > depth[b])
        {
            up.push_back(a);
            a = parent[a];
        }
        while (depth[b] > depth[a])
        {
            down.push_back(b);
            b = parent[b];
        }
        while (a != b)
        {
            up.push_back(a);
            down.push_back(b);
            a = parent[a];
            b = parent[b];
        }
        up.push_back(a);
        up.insert(up.end(), down.rbegin(), down.rend());
        return up;
    }
};

inline SpanningTree bfs_spanning_tree(const SimpleGraph& g, std::size_t root = 0)
{
    if (!g.connected())
        throw Error("disconnected", "graph is not connected");
    SpanningTree t{root, std::vector<std::size_t>(g.vertex_count(), root),
                   std::vector<std::size_t>(g.vertex_count(), 0)};
    std::vector<char> seen(g.vertex_count(), 0);
    std::queue<std::size_t> q;
    q.push(root);
    seen[root] = 1;
    while (!q.empty())
    {
        const std::size_t v = q.front();
        q.pop();
        for (std::size_t w : g.neighbors(v))
            if (!seen[w])
            {
                seen[w] = 1;
                t.parent[w] = v;
                t.depth[w] = t.depth[v] + 1;
                q.push(w);
            }
    }
    return t;
}

/// Edges outside the tree, oriented from smaller to larger endpoint, in edge order.
inline std::vector<std::pair<std::size_t, std::size_t>> complement_edges(const SimpleGraph& g, const SpanningTree& t)
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& e : g.edges())
        if (!t.contains(e.first, e.second))
            out.push_back(e);
    return out;
}

} // namespace treewind
