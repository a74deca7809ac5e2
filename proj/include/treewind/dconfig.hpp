/**
 * Discretized configuration space DF_n(G) of a planar leaf-rooted tree.
 *
 * Cells are sets of n cells of G (vertices or edges) with pairwise disjoint
 * closures. Only 0- and 1-cells are materialized; 2-cells enter through the
 * validity predicate used by the blocked-vertex test.
 *
 * 1-cells are classified into Critical / Collapsible / Residual following
 * the discrete Morse matching of Farley and Sabalka. The critical cells give
 * a basis of H_1, the collapsible cells a spanning tree of the one-skeleton,
 * and residual cells project onto critical ones through "lies on top of".
 */
#pragma once

#include <algorithm>
#include <cstddef>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "combinatorics.hpp"
#include "error.hpp"
#include "tree.hpp"

namespace treewind {

using Config = std::vector<Vertex>; // sorted vertex labels

/// A cell of DF_n(G): its vertex parts and edge parts.
struct ConfigCell {
    std::vector<Vertex> vertices;
    std::vector<Edge> edges;

    std::size_t dim() const { return edges.size(); }
    std::size_t size() const { return vertices.size() + edges.size(); }
    friend bool operator==(const ConfigCell&, const ConfigCell&) = default;
};

/// A 1-cell {sigma_1 = edge, vertices...}, vertices sorted.
struct OneCell {
    Edge edge;
    std::vector<Vertex> vertices;

    /// Endpoint {tau(sigma_1), vertices...}; the cell is oriented away from it.
    Config low() const { return with(edge.tau); }
    /// Endpoint {iota(sigma_1), vertices...}.
    Config high() const { return with(edge.iota); }

    friend bool operator==(const OneCell&, const OneCell&) = default;

private:
    Config with(Vertex v) const
    {
        Config c = vertices;
        c.insert(std::upper_bound(c.begin(), c.end(), v), v);
        return c;
    }
};

enum class CellClass { Critical, Collapsible, Residual };

inline const char* to_string(CellClass c)
{
    switch (c)
    {
    case CellClass::Critical: return "critical";
    case CellClass::Collapsible: return "collapsible";
    case CellClass::Residual: return "residual";
    }
    return "?";
}

struct OneCellClass {
    CellClass kind = CellClass::Residual;
    Edge edge;
    std::vector<bool> blocked; // parallel to OneCell::vertices
    bool order_respecting = false;
};

/// Pairwise disjoint closures, distinct parts.
inline bool is_valid_cell(const PlanarTree& tree, const ConfigCell& cell)
{
    std::vector<char> used(tree.vertex_count(), 0);
    auto claim = [&](Vertex v) {
        if (v >= used.size() || used[v])
            return false;
        used[v] = 1;
        return true;
    };
    for (Vertex v : cell.vertices)
        if (!claim(v))
            return false;
    for (const Edge& e : cell.edges)
    {
        if (!tree.has_edge(e.tau, e.iota))
            return false;
        if (!claim(e.tau) || !claim(e.iota))
            return false;
    }
    return true;
}

inline ConfigCell as_cell(const OneCell& c) { return {c.vertices, {c.edge}}; }

/**
 * Classify a 1-cell.
 *
 * A vertex part is blocked when it is the root or when sliding it onto its
 * parent edge e(v) does not give a 2-cell. The edge is order respecting when
 * every vertex part v hanging at tau(sigma_1) (tau(e(v)) == tau(sigma_1))
 * has a label above iota(sigma_1).
 */
inline OneCellClass classify(const PlanarTree& tree, const OneCell& cell)
{
    OneCellClass out;
    out.edge = cell.edge;
    out.blocked.resize(cell.vertices.size());
    out.order_respecting = true;

    bool all_blocked = true;
    bool unblocked_above_iota = true;
    for (std::size_t i = 0; i < cell.vertices.size(); ++i)
    {
        const Vertex v = cell.vertices[i];
        bool blocked = v == tree.root();
        if (!blocked)
        {
            ConfigCell slid{{}, {cell.edge, tree.parent_edge(v)}};
            for (std::size_t j = 0; j < cell.vertices.size(); ++j)
                if (j != i)
                    slid.vertices.push_back(cell.vertices[j]);
            blocked = !is_valid_cell(tree, slid);

            if (tree.parent(v) == cell.edge.tau && !(cell.edge.iota < v))
                out.order_respecting = false;
        }
        out.blocked[i] = blocked;
        all_blocked = all_blocked && blocked;
        if (!blocked && !(v > cell.edge.iota))
            unblocked_above_iota = false;
    }

    if (!out.order_respecting && all_blocked)
        out.kind = CellClass::Critical;
    else if (out.order_respecting && unblocked_above_iota)
        out.kind = CellClass::Collapsible;
    else
        out.kind = CellClass::Residual;
    return out;
}

/**
 * c lies on top of crit when both use the same edge and place equally many
 * vertex parts in every component of G - tau(edge).
 */
inline bool lies_on_top(const PlanarTree& tree, const OneCell& c, const OneCell& crit)
{
    if (c.edge != crit.edge || c.vertices.size() != crit.vertices.size())
        return false;
    const Vertex tau = c.edge.tau;
    auto signature = [&](const std::vector<Vertex>& vs) {
        std::vector<Vertex> gates;
        gates.reserve(vs.size());
        for (Vertex v : vs)
            gates.push_back(tree.gateway(tau, v));
        std::sort(gates.begin(), gates.end());
        return gates;
    };
    return signature(c.vertices) == signature(crit.vertices);
}

namespace detail {

inline void require_path_condition(const PlanarTree& tree, std::size_t n)
{
    if (n < 1)
        throw Error("invalid_argument", "particle count must be >= 1");
    if (n >= tree.vertex_count())
        throw Error("invalid_argument", "particle count must be below the vertex count");
    if (auto bad = path_condition_violation(tree, n))
        throw Error("path_condition",
                    "path between '" + tree.id(bad->first) + "' and '" + tree.id(bad->second) +
                        "' has fewer than " + std::to_string(n) + " vertices; subdivide the tree");
}

/// All 1-cells ordered by (tau, iota, vertex parts lexicographic).
inline std::vector<OneCell> one_cells(const PlanarTree& tree, std::size_t n)
{
    std::vector<OneCell> out;
    const std::size_t m = tree.vertex_count();
    for (const Edge& e : tree.edges())
    {
        std::vector<Vertex> others;
        for (Vertex v = 0; v < m; ++v)
            if (v != e.tau && v != e.iota)
                others.push_back(v);
        if (others.size() < n - 1)
            continue;
        auto pick = first_combination(n - 1);
        do
        {
            OneCell c{e, {}};
            for (std::size_t k : pick)
                c.vertices.push_back(others[k]);
            out.push_back(std::move(c));
        } while (next_combination(pick, others.size()));
    }
    return out;
}

} // namespace detail

/**
 * Cells of DF_n(G) of dimension 0 or 1, in lexicographic order of DFS labels
 * (1-cells: by edge, then vertex parts).
 */
inline std::vector<ConfigCell> enumerate_cells(const PlanarTree& tree, std::size_t n, std::size_t dim)
{
    detail::require_path_condition(tree, n);
    std::vector<ConfigCell> out;
    if (dim == 0)
    {
        auto pick = first_combination(n);
        do
            out.push_back({pick, {}});
        while (next_combination(pick, tree.vertex_count()));
    }
    else if (dim == 1)
    {
        for (auto& c : detail::one_cells(tree, n))
            out.push_back(as_cell(c));
    }
    else
    {
        throw Error("invalid_argument", "only cells of dimension 0 and 1 are enumerated");
    }
    return out;
}

/// One oriented step along a path of 1-cells between 0-cells (colex ranks).
struct PathStep {
    std::size_t cell = 0; // index into Census::cells()
    std::size_t from = 0;
    std::size_t to = 0;
    bool forward = true;  // from == low endpoint
};

/**
 * Full 1-cell census of DF_n(G): classes, critical basis, lies-on-top
 * projection and the collapsible spanning tree. Immutable after construction.
 */
class Census {
public:
    Census(PlanarTree tree, std::size_t n) : tree_(std::move(tree)), n_(n)
    {
        detail::require_path_condition(tree_, n_);
        cells_ = detail::one_cells(tree_, n_);
        classes_.reserve(cells_.size());
        low_.reserve(cells_.size());
        high_.reserve(cells_.size());
        for (const auto& c : cells_)
        {
            classes_.push_back(classify(tree_, c));
            low_.push_back(colex_rank(c.low()));
            high_.push_back(colex_rank(c.high()));
        }

        for (std::size_t i = 0; i < cells_.size(); ++i)
        {
            if (classes_[i].kind == CellClass::Critical)
                critical_.push_back(i);
            if (classes_[i].kind != CellClass::Collapsible)
                noncollapsible_.push_back(i);
        }

        basis_of_.assign(cells_.size(), kNoVertex);
        for (std::size_t b = 0; b < critical_.size(); ++b)
            basis_of_[critical_[b]] = b;

        lies_over_.resize(noncollapsible_.size());
        for (std::size_t k = 0; k < noncollapsible_.size(); ++k)
        {
            const OneCell& c = cells_[noncollapsible_[k]];
            for (std::size_t b = 0; b < critical_.size(); ++b)
                if (lies_on_top(tree_, c, cells_[critical_[b]]))
                    lies_over_[k].push_back(b);
            if (lies_over_[k].size() > 1)
            {
                ++multi_lift_;
                if (n_ == 2)
                    throw Error("internal", "a residual 1-cell lies on top of several critical cells for n = 2");
            }
        }

        zero_cells_ = binomial(tree_.vertex_count(), n_);
        tree_adj_.resize(zero_cells_);
        for (std::size_t i = 0; i < cells_.size(); ++i)
            if (classes_[i].kind == CellClass::Collapsible)
            {
                tree_adj_[low_[i]].push_back(i);
                tree_adj_[high_[i]].push_back(i);
            }
    }

    const PlanarTree& tree() const { return tree_; }
    std::size_t particles() const { return n_; }
    std::size_t zero_cell_count() const { return zero_cells_; }

    std::span<const OneCell> cells() const { return cells_; }
    const OneCellClass& classification(std::size_t cell) const { return classes_.at(cell); }
    std::size_t low_state(std::size_t cell) const { return low_.at(cell); }
    std::size_t high_state(std::size_t cell) const { return high_.at(cell); }

    /// Critical cells in basis order (cell indices).
    std::span<const std::size_t> critical() const { return critical_; }
    std::size_t rank() const { return critical_.size(); }
    /// Basis index of a critical cell, kNoVertex otherwise.
    std::size_t basis_index(std::size_t cell) const { return basis_of_.at(cell); }

    /// Non-collapsible cells in census order (cell indices).
    std::span<const std::size_t> noncollapsible() const { return noncollapsible_; }
    /// Basis indices the k-th non-collapsible cell lies on top of.
    std::span<const std::size_t> lies_over(std::size_t k) const { return lies_over_.at(k); }
    /// Residual cells found lying on top of more than one critical cell.
    std::size_t multi_lift_count() const { return multi_lift_; }

    std::size_t count(CellClass kind) const
    {
        return static_cast<std::size_t>(std::count_if(classes_.begin(), classes_.end(),
                                                      [&](const OneCellClass& c) { return c.kind == kind; }));
    }

    /**
     * Map signed traversal counts of the non-collapsible cells to
     * coordinates in the critical basis.
     */
    template <typename T>
    std::vector<T> project_counts(std::span<const T> counts) const
    {
        if (counts.size() != noncollapsible_.size())
            throw Error("dimension_mismatch", "expected " + std::to_string(noncollapsible_.size()) +
                                                  " non-collapsible counts, got " + std::to_string(counts.size()));
        std::vector<T> out(critical_.size(), T{});
        for (std::size_t k = 0; k < counts.size(); ++k)
            for (std::size_t b : lies_over_[k])
                out[b] += counts[k];
        return out;
    }

    /// The unique path from 0-cell a to 0-cell b through collapsible 1-cells.
    std::vector<PathStep> collapsible_path(std::size_t a, std::size_t b) const
    {
        if (a >= zero_cells_ || b >= zero_cells_)
            throw Error("invalid_argument", "0-cell index out of range");
        std::vector<std::size_t> via(zero_cells_, kNoVertex);
        std::vector<char> seen(zero_cells_, 0);
        std::queue<std::size_t> q;
        q.push(a);
        seen[a] = 1;
        while (!q.empty() && !seen[b])
        {
            const std::size_t s = q.front();
            q.pop();
            for (std::size_t cell : tree_adj_[s])
            {
                const std::size_t t = low_[cell] == s ? high_[cell] : low_[cell];
                if (!seen[t])
                {
                    seen[t] = 1;
                    via[t] = cell;
                    q.push(t);
                }
            }
        }
        if (!seen[b])
            throw Error("internal", "collapsible cells do not connect the two 0-cells");

        std::vector<PathStep> path;
        for (std::size_t s = b; s != a;)
        {
            const std::size_t cell = via[s];
            const std::size_t prev = low_[cell] == s ? high_[cell] : low_[cell];
            path.push_back({cell, prev, s, low_[cell] == prev});
            s = prev;
        }
        std::reverse(path.begin(), path.end());
        return path;
    }

    /// Connected components of the collapsible subcomplex (1 when it spans).
    std::size_t collapsible_components() const
    {
        std::vector<char> seen(zero_cells_, 0);
        std::size_t comps = 0;
        for (std::size_t s0 = 0; s0 < zero_cells_; ++s0)
        {
            if (seen[s0])
                continue;
            ++comps;
            std::vector<std::size_t> stack{s0};
            seen[s0] = 1;
            while (!stack.empty())
            {
                const std::size_t s = stack.back();
                stack.pop_back();
                for (std::size_t cell : tree_adj_[s])
                {
                    const std::size_t t = low_[cell] == s ? high_[cell] : low_[cell];
                    if (!seen[t])
                    {
                        seen[t] = 1;
                        stack.push_back(t);
                    }
                }
            }
        }
        return comps;
    }

    std::string describe(std::size_t cell) const
    {
        const OneCell& c = cells_.at(cell);
        std::ostringstream os;
        os << '{';
        for (Vertex v : c.vertices)
            os << 'v' << v << ", ";
        os << 'e' << c.edge.tau << '-' << c.edge.iota << '}';
        return os.str();
    }

    /// CSV: cell_id,parts,class,tau,iota,lies_over
    std::string census_csv() const
    {
        std::vector<std::string> over(cells_.size());
        for (std::size_t k = 0; k < noncollapsible_.size(); ++k)
        {
            std::string s;
            for (std::size_t b : lies_over_[k])
                s += (s.empty() ? "" : ";") + std::to_string(b);
            over[noncollapsible_[k]] = s;
        }
        std::ostringstream os;
        os << "cell_id,parts,class,tau,iota,lies_over\n";
        for (std::size_t i = 0; i < cells_.size(); ++i)
        {
            const OneCell& c = cells_[i];
            os << i << ',';
            for (Vertex v : c.vertices)
                os << v << ';';
            os << c.edge.tau << '-' << c.edge.iota << ',' << to_string(classes_[i].kind) << ',' << c.edge.tau << ','
               << c.edge.iota << ',' << over[i] << '\n';
        }
        return os.str();
    }

private:
    PlanarTree tree_;
    std::size_t n_;
    std::vector<OneCell> cells_;
    std::vector<OneCellClass> classes_;
    std::vector<std::size_t> low_, high_;
    std::vector<std::size_t> critical_;
    std::vector<std::size_t> basis_of_;
    std::vector<std::size_t> noncollapsible_;
    std::vector<std::vector<std::size_t>> lies_over_;
    std::size_t multi_lift_ = 0;
    std::size_t zero_cells_ = 0;
    std::vector<std::vector<std::size_t>> tree_adj_;
};

/// Oriented critical 1-cells in basis order (tau, iota, vertex parts).
inline std::vector<OneCell> critical_basis(const PlanarTree& tree, std::size_t n)
{
    Census census(tree, n);
    std::vector<OneCell> out;
    for (std::size_t i : census.critical())
        out.push_back(census.cells()[i]);
    return out;
}

} // namespace treewind
