/**
 * Planar leaf-rooted trees.
 *
 * Vertices are stored under their depth-first labels: the root is 0 and
 * children are visited in the order given by the input document, which is
 * the planar embedding. In this labelling every parent has a smaller label
 * than its children, so the parent edge e(v) of a vertex v has tau = parent(v)
 * and iota = v. The original input ids are kept for reporting.
 */
#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "combinatorics.hpp"
#include "error.hpp"

namespace treewind {

using Vertex = std::size_t;
inline constexpr Vertex kNoVertex = std::numeric_limits<Vertex>::max();

/// A tree edge in DFS labels, tau < iota.
struct Edge {
    Vertex tau = 0;
    Vertex iota = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Ordered child lists keyed by input id; the list order is the embedding.
using ChildList = std::vector<std::pair<std::string, std::vector<std::string>>>;

class PlanarTree {
public:
    PlanarTree() = default;

    /**
     * Build and validate a tree from input ids.
     *
     * Errors (code): "cycle_detected", "duplicate_label", "disconnected",
     * "root_not_leaf", "unknown_root". Each message names the offending id.
     */
    static PlanarTree build(std::string name, const std::string& root, const ChildList& children)
    {
        std::unordered_map<std::string, const std::vector<std::string>*> kids;
        for (const auto& [id, list] : children)
        {
            if (!kids.emplace(id, &list).second)
                throw Error("duplicate_label", "vertex '" + id + "' has two child lists");
            std::unordered_set<std::string> seen;
            for (const auto& c : list)
                if (!seen.insert(c).second)
                    throw Error("duplicate_label", "child '" + c + "' listed twice under '" + id + "'");
        }

        PlanarTree tree;
        tree.name_ = std::move(name);
        std::unordered_map<std::string, Vertex> label;
        std::vector<std::pair<std::string, std::size_t>> stack; // (id, next child)

        auto visit = [&](const std::string& id, Vertex parent) {
            if (label.count(id))
                throw Error("cycle_detected", "cycle detected at vertex '" + id + "'");
            const Vertex v = tree.ids_.size();
            label.emplace(id, v);
            tree.ids_.push_back(id);
            tree.parent_.push_back(parent);
            tree.children_.emplace_back();
            if (parent != kNoVertex)
                tree.children_[parent].push_back(v);
            stack.emplace_back(id, 0);
        };

        visit(root, kNoVertex);
        while (!stack.empty())
        {
            auto& [id, next] = stack.back();
            auto it = kids.find(id);
            if (it == kids.end() || next >= it->second->size())
            {
                stack.pop_back();
                continue;
            }
            const std::string child = (*it->second)[next++];
            const Vertex parent = label.at(id);
            visit(child, parent);
        }

        for (const auto& [id, list] : children)
        {
            if (!label.count(id))
                throw Error("disconnected", "vertex '" + id + "' is not reachable from root '" + root + "'");
        }

        if (tree.children_[0].size() != 1)
            throw Error("root_not_leaf", "root '" + root + "' has degree " +
                                             std::to_string(tree.children_[0].size()) + ", expected 1");
        tree.finish();
        return tree;
    }

    /// Star with `leaves` leaves rooted at a leaf: root 0, center 1, leaves 2..l.
    static PlanarTree star(std::size_t leaves)
    {
        if (leaves < 1)
            throw Error("invalid_argument", "a star needs at least one leaf");
        ChildList ch;
        ch.push_back({"0", {"1"}});
        std::vector<std::string> rest;
        for (std::size_t i = 2; i <= leaves; ++i)
            rest.push_back(std::to_string(i));
        ch.push_back({"1", rest});
        return build("star" + std::to_string(leaves), "0", ch);
    }

    /// Path with `vertices` vertices rooted at an end.
    static PlanarTree path(std::size_t vertices)
    {
        if (vertices < 2)
            throw Error("invalid_argument", "a path needs at least two vertices");
        ChildList ch;
        for (std::size_t i = 0; i + 1 < vertices; ++i)
            ch.push_back({std::to_string(i), {std::to_string(i + 1)}});
        return build("path" + std::to_string(vertices), "0", ch);
    }

    const std::string& name() const { return name_; }
    std::size_t vertex_count() const { return parent_.size(); }
    std::size_t edge_count() const { return parent_.empty() ? 0 : parent_.size() - 1; }
    Vertex root() const { return 0; }
    Vertex parent(Vertex v) const { return parent_.at(v); }
    std::span<const Vertex> children(Vertex v) const { return children_.at(v); }
    const std::string& id(Vertex v) const { return ids_.at(v); }

    std::optional<Vertex> find(std::string_view id) const
    {
        auto it = std::find(ids_.begin(), ids_.end(), id);
        if (it == ids_.end())
            return std::nullopt;
        return static_cast<Vertex>(it - ids_.begin());
    }

    std::size_t degree(Vertex v) const
    {
        return children_.at(v).size() + (parent_.at(v) == kNoVertex ? 0 : 1);
    }

    bool is_essential(Vertex v) const { return degree(v) >= 3; }

    std::vector<Vertex> essential_vertices() const
    {
        std::vector<Vertex> out;
        for (Vertex v = 0; v < vertex_count(); ++v)
            if (is_essential(v))
                out.push_back(v);
        return out;
    }

    std::size_t max_degree() const
    {
        std::size_t d = 0;
        for (Vertex v = 0; v < vertex_count(); ++v)
            d = std::max(d, degree(v));
        return d;
    }

    /// e(v): the edge from v towards the root. Undefined for the root.
    Edge parent_edge(Vertex v) const
    {
        if (v == 0 || v >= vertex_count())
            throw Error("invalid_argument", "vertex has no parent edge");
        return {parent_[v], v};
    }

    bool has_edge(Vertex a, Vertex b) const
    {
        if (a > b)
            std::swap(a, b);
        return b < vertex_count() && b != 0 && parent_[b] == a;
    }

    /// All edges sorted by (tau, iota).
    std::vector<Edge> edges() const
    {
        std::vector<Edge> out;
        for (Vertex v = 1; v < vertex_count(); ++v)
            out.push_back({parent_[v], v});
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<Vertex> neighbors(Vertex v) const
    {
        std::vector<Vertex> out;
        if (parent_.at(v) != kNoVertex)
            out.push_back(parent_[v]);
        out.insert(out.end(), children_[v].begin(), children_[v].end());
        return out;
    }

    /// Number of vertices in the subtree hanging at v (v included).
    std::size_t subtree_size(Vertex v) const { return subtree_.at(v); }

    /**
     * Identify the connected component of G - center that contains u by the
     * neighbour of `center` it attaches through.
     */
    Vertex gateway(Vertex center, Vertex u) const
    {
        if (u == center)
            throw Error("invalid_argument", "gateway of the removed vertex itself");
        if (u > center && u < center + subtree_[center])
        {
            const auto& ch = children_[center];
            auto it = std::upper_bound(ch.begin(), ch.end(), u);
            return *(it - 1);
        }
        return parent_[center];
    }

    /// Stable fingerprint of ids and embedding.
    std::string fingerprint() const
    {
        std::ostringstream os;
        for (Vertex v = 0; v < vertex_count(); ++v)
            os << ids_[v] << '\x1f' << (parent_[v] == kNoVertex ? std::string("-") : std::to_string(parent_[v]))
               << '\x1e';
        std::ostringstream hex;
        hex << std::hex << fnv1a(os.str());
        return hex.str();
    }

private:
    void finish()
    {
        subtree_.assign(vertex_count(), 1);
        for (Vertex v = vertex_count(); v-- > 1;)
            subtree_[parent_[v]] += subtree_[v];
    }

    std::string name_;
    std::vector<std::string> ids_;
    std::vector<Vertex> parent_;
    std::vector<std::vector<Vertex>> children_;
    std::vector<std::size_t> subtree_;
};

namespace detail {

inline std::string id_string(const nlohmann::json& j)
{
    if (j.is_string())
        return j.get<std::string>();
    if (j.is_number_integer())
        return std::to_string(j.get<long long>());
    throw Error("schema", "vertex ids must be strings or integers, got " + j.dump());
}

} // namespace detail

/**
 * Parse a tree document:
 * {"name": str, "root": id, "children": {id: [id, ...], ...}}.
 */
inline PlanarTree parse_tree(std::string_view document)
{
    // nlohmann keeps the last of duplicated object keys; record them here.
    std::vector<std::string> keys;
    std::optional<std::string> duplicate;
    nlohmann::json::parser_callback_t cb = [&](int depth, nlohmann::json::parse_event_t event,
                                               nlohmann::json& parsed) {
        if (event == nlohmann::json::parse_event_t::key && depth == 2)
        {
            const auto k = parsed.get<std::string>();
            if (std::find(keys.begin(), keys.end(), k) != keys.end())
                duplicate = k;
            keys.push_back(k);
        }
        return true;
    };

    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(document.begin(), document.end(), cb);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw Error("parse_error", e.what());
    }
    if (!j.is_object() || !j.contains("root") || !j.contains("children") || !j["children"].is_object())
        throw Error("schema", "tree document needs \"root\" and an object \"children\"");
    if (duplicate)
        throw Error("duplicate_label", "vertex '" + *duplicate + "' has two child lists");

    ChildList children;
    for (const auto& [key, value] : j["children"].items())
    {
        if (!value.is_array())
            throw Error("schema", "children of '" + key + "' must be an array");
        std::vector<std::string> list;
        for (const auto& c : value)
            list.push_back(detail::id_string(c));
        children.emplace_back(key, std::move(list));
    }
    const std::string name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "tree";
    return PlanarTree::build(name, detail::id_string(j["root"]), children);
}

inline PlanarTree load_tree(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw Error("io", "cannot open tree document " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_tree(buf.str());
}

/// Document form of a tree, ids as given.
inline nlohmann::json to_json(const PlanarTree& tree)
{
    nlohmann::json children = nlohmann::json::object();
    for (Vertex v = 0; v < tree.vertex_count(); ++v)
    {
        if (tree.children(v).empty())
            continue;
        nlohmann::json list = nlohmann::json::array();
        for (Vertex c : tree.children(v))
            list.push_back(tree.id(c));
        children[tree.id(v)] = list;
    }
    return {{"name", tree.name()}, {"root", tree.id(0)}, {"children", children}};
}

/// Input id -> depth-first label.
inline std::map<std::string, Vertex> dfs_labels(const PlanarTree& tree)
{
    std::map<std::string, Vertex> out;
    for (Vertex v = 0; v < tree.vertex_count(); ++v)
        out.emplace(tree.id(v), v);
    return out;
}

/**
 * First pair (u, v) of vertices of degree != 2 whose connecting path has
 * fewer than n vertices, if any.
 */
inline std::optional<std::pair<Vertex, Vertex>> path_condition_violation(const PlanarTree& tree, std::size_t n)
{
    const std::size_t m = tree.vertex_count();
    std::vector<std::size_t> dist(m);
    std::vector<Vertex> queue;
    for (Vertex u = 0; u < m; ++u)
    {
        if (tree.degree(u) == 2)
            continue;
        std::fill(dist.begin(), dist.end(), kNoVertex);
        dist[u] = 0;
        queue.assign(1, u);
        for (std::size_t head = 0; head < queue.size(); ++head)
            for (Vertex w : tree.neighbors(queue[head]))
                if (dist[w] == kNoVertex)
                {
                    dist[w] = dist[queue[head]] + 1;
                    queue.push_back(w);
                }
        for (Vertex v = u + 1; v < m; ++v)
            if (tree.degree(v) != 2 && dist[v] + 1 < n)
                return std::make_pair(u, v);
    }
    return std::nullopt;
}

inline bool check_path_condition(const PlanarTree& tree, std::size_t n)
{
    return !path_condition_violation(tree, n).has_value();
}

/**
 * Replace every edge by a path of k edges. New vertices get ids
 * "<parent>~<child>#<j>" (primed until unique) and keep the planar order.
 */
inline PlanarTree subdivide(const PlanarTree& tree, std::size_t k)
{
    if (k < 1)
        throw Error("invalid_argument", "subdivision factor must be >= 1");
    if (k == 1)
        return tree;

    std::unordered_set<std::string> taken;
    for (Vertex v = 0; v < tree.vertex_count(); ++v)
        taken.insert(tree.id(v));
    auto fresh = [&](std::string id) {
        while (taken.count(id))
            id += '\'';
        taken.insert(id);
        return id;
    };

    ChildList ch;
    for (Vertex v = 0; v < tree.vertex_count(); ++v)
    {
        std::vector<std::string> list;
        for (Vertex c : tree.children(v))
        {
            std::string prev = tree.id(v);
            std::vector<std::string> chain;
            for (std::size_t j = 1; j < k; ++j)
                chain.push_back(fresh(tree.id(v) + "~" + tree.id(c) + "#" + std::to_string(j)));
            list.push_back(chain.front());
            for (std::size_t j = 0; j + 1 < chain.size(); ++j)
                ch.push_back({chain[j], {chain[j + 1]}});
            ch.push_back({chain.back(), {tree.id(c)}});
        }
        if (!list.empty())
            ch.push_back({tree.id(v), list});
    }
    return PlanarTree::build(tree.name(), tree.id(0), ch);
}

} // namespace treewind
