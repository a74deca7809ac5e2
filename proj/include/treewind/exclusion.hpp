/**
 * The lazy n-particle exclusion process on a tree.
 *
 * One step flips a coin and, on success, picks an edge of G uniformly; if
 * exactly one endpoint is occupied the particle crosses it. Every valid move
 * therefore has probability 1/(2E). States are n-subsets of DFS labels,
 * indexed colexicographically; they are the 0-cells of DF_n(G) and the
 * moves are its 1-cells.
 */
#pragma once

#include <algorithm>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "combinatorics.hpp"
#include "dconfig.hpp"
#include "error.hpp"
#include "markov.hpp"
#include "tree.hpp"

namespace treewind {

inline std::string config_name(const Config& c)
{
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < c.size(); ++i)
        os << (i ? "," : "") << c[i];
    os << '}';
    return os.str();
}

namespace detail {

inline Matrix exclusion_matrix(const PlanarTree& tree, std::size_t n)
{
    if (n < 1 || n >= tree.vertex_count())
        throw Error("invalid_argument", "particle count must satisfy 1 <= n < V");
    const std::size_t states = binomial(tree.vertex_count(), n);
    const auto edges = tree.edges();
    const double move = 1.0 / (2.0 * static_cast<double>(edges.size()));
    Matrix P = Matrix::Zero(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(states));
    std::vector<char> occupied(tree.vertex_count());
    for (std::size_t s = 0; s < states; ++s)
    {
        const Config c = colex_unrank(s, n);
        std::fill(occupied.begin(), occupied.end(), 0);
        for (Vertex v : c)
            occupied[v] = 1;
        double out = 0;
        for (const Edge& e : edges)
        {
            if (occupied[e.tau] == occupied[e.iota])
                continue;
            const Vertex from = occupied[e.tau] ? e.tau : e.iota;
            const Vertex to = occupied[e.tau] ? e.iota : e.tau;
            Config next = c;
            std::replace(next.begin(), next.end(), from, to);
            std::sort(next.begin(), next.end());
            P(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(colex_rank(next))) += move;
            out += move;
        }
        P(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) = 1.0 - out;
    }
    return P;
}

inline std::vector<std::string> exclusion_names(std::size_t vertices, std::size_t n)
{
    std::vector<std::string> names;
    const std::size_t states = binomial(vertices, n);
    for (std::size_t s = 0; s < states; ++s)
        names.push_back(config_name(colex_unrank(s, n)));
    return names;
}

} // namespace detail

class ExclusionProcess {
public:
    ExclusionProcess(PlanarTree tree, std::size_t n)
        : tree_(std::move(tree)), n_(n),
          chain_(detail::exclusion_matrix(tree_, n_), detail::exclusion_names(tree_.vertex_count(), n_))
    {
    }

    const PlanarTree& tree() const { return tree_; }
    std::size_t particles() const { return n_; }
    const FiniteChain& chain() const { return chain_; }
    std::size_t state_count() const { return chain_.size(); }

    Config state(std::size_t s) const { return colex_unrank(s, n_); }
    std::size_t index(const Config& c) const { return colex_rank(c); }

private:
    PlanarTree tree_;
    std::size_t n_;
    FiniteChain chain_;
};

inline ExclusionProcess build_exclusion(const PlanarTree& tree, std::size_t n) { return {tree, n}; }

/**
 * One-skeleton of DF_n(G) as adjacency lists over colex-indexed 0-cells,
 * built from the 1-cell enumeration. For n = 2 this is the graph of
 * unordered vertex pairs of G.
 */
inline std::vector<std::vector<std::size_t>> one_skeleton(const PlanarTree& tree, std::size_t n)
{
    std::vector<std::vector<std::size_t>> adj(binomial(tree.vertex_count(), n));
    for (const OneCell& c : detail::one_cells(tree, n))
    {
        const std::size_t a = colex_rank(c.low());
        const std::size_t b = colex_rank(c.high());
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& list : adj)
        std::sort(list.begin(), list.end());
    return adj;
}

} // namespace treewind
