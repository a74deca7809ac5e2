#include <catch_amalgamated.hpp>

#include <functional>
#include <map>

#include <treewind/tree.hpp>

#include "oracles.hpp"

using namespace treewind;

namespace {

const char* kH = R"({"name": "H", "root": 0, "children": {"0": [1], "1": [2], "2": [3, 9], "3": [4],
                     "4": [5, 7], "5": [6], "7": [8], "9": [10]}})";

std::string code_of(const std::function<void()>& f)
{
    try
    {
        f();
    }
    catch (const Error& e)
    {
        return e.code();
    }
    return "";
}

} // namespace

TEST_CASE("H-graph document keeps the drawn labels")
{
    const PlanarTree t = parse_tree(kH);
    CHECK(t.vertex_count() == 11);
    CHECK(t.edge_count() == 10);
    for (const auto& [id, label] : dfs_labels(t))
        CHECK(std::stoul(id) == label);
}

TEST_CASE("single edge")
{
    const PlanarTree t = parse_tree(R"({"name": "e", "root": "a", "children": {"a": ["b"]}})");
    CHECK(t.vertex_count() == 2);
    CHECK(t.edge_count() == 1);
    CHECK(t.id(0) == "a");
}

TEST_CASE("malformed documents name the offending label")
{
    CHECK(code_of([] { parse_tree(R"({"root": "a", "children": {"a": ["b"], "b": ["a"]}})"); }) == "cycle_detected");
    CHECK(code_of([] { parse_tree(R"({"root": "a", "children": {"a": ["b", "c"]}})"); }) == "root_not_leaf");
    CHECK(code_of([] { parse_tree(R"({"root": "a", "children": {"a": ["b"], "a": ["c"]}})"); }) ==
          "duplicate_label");
    CHECK(code_of([] { parse_tree(R"({"root": "a", "children": {"a": ["b", "b"]}})"); }) == "duplicate_label");
    CHECK(code_of([] { parse_tree(R"({"root": "a", "children": {"a": ["b"], "x": ["y"]}})"); }) == "disconnected");
    CHECK(code_of([] { parse_tree(R"({"root": "a", "children": {"a": ["b"], "b": ["c"], "c": ["b"]}})"); }) ==
          "cycle_detected");
    CHECK(code_of([] { parse_tree(R"({"root": "a"})"); }) == "schema");
    CHECK(code_of([] { parse_tree("{not json"); }) == "parse_error");
    try
    {
        parse_tree(R"({"root": "a", "children": {"a": ["b"], "x": ["y"]}})");
    }
    catch (const Error& e)
    {
        CHECK(std::string(e.what()).find("'x'") != std::string::npos);
    }
}

TEST_CASE("dfs labels of a path and a star")
{
    const PlanarTree p = parse_tree(R"({"root": "x", "children": {"x": ["y"], "y": ["z"]}})");
    CHECK(dfs_labels(p) == std::map<std::string, Vertex>{{"x", 0}, {"y", 1}, {"z", 2}});

    for (std::size_t l = 3; l <= 7; ++l)
    {
        const PlanarTree s = PlanarTree::star(l);
        // Recursive preorder over the child lists as given.
        std::map<std::string, std::vector<std::string>> kids{{"0", {"1"}}};
        for (std::size_t k = 2; k <= l; ++k)
            kids["1"].push_back(std::to_string(k));
        std::map<std::string, Vertex> expect;
        std::function<void(const std::string&)> visit = [&](const std::string& id) {
            expect.emplace(id, expect.size());
            for (const auto& c : kids[id])
                visit(c);
        };
        visit("0");
        CHECK(dfs_labels(s) == expect);
        CHECK(s.degree(1) == l);
    }
}

TEST_CASE("dfs labels depend only on structure and child order")
{
    const PlanarTree a = parse_tree(kH);
    const PlanarTree b = parse_tree(R"({"root": "r", "children": {"r": ["q"], "q": ["c"], "c": ["d", "j"],
        "d": ["e"], "e": ["f", "h"], "f": ["g"], "h": ["i"], "j": ["k"]}})");
    REQUIRE(a.vertex_count() == b.vertex_count());
    for (Vertex v = 1; v < a.vertex_count(); ++v)
        CHECK(a.parent(v) == b.parent(v));
}

TEST_CASE("path condition")
{
    for (const auto& t : oracle::all_trees_up_to(8))
    {
        CHECK(check_path_condition(t, 2));
        for (std::size_t n = 3; n <= 4; ++n)
            CHECK(check_path_condition(t, n) == oracle::path_condition(t, n));
    }
    const PlanarTree s3 = PlanarTree::star(3);
    CHECK_FALSE(check_path_condition(s3, 3));
    CHECK_FALSE(oracle::path_condition(s3, 3));
    CHECK(check_path_condition(subdivide(s3, 2), 3));
    CHECK(oracle::path_condition(subdivide(s3, 2), 3));
}

TEST_CASE("subdivision")
{
    const PlanarTree s3 = PlanarTree::star(3);
    CHECK(subdivide(s3, 1).fingerprint() == s3.fingerprint());
    const PlanarTree s = subdivide(s3, 2);
    CHECK(s.vertex_count() == 7);
    CHECK(s.edge_count() == 6);

    const PlanarTree h = parse_tree(kH);
    auto essential_ids = [](const PlanarTree& t) {
        std::vector<std::string> out;
        for (Vertex v : t.essential_vertices())
            out.push_back(t.id(v));
        std::sort(out.begin(), out.end());
        return out;
    };
    for (std::size_t k = 1; k <= 4; ++k)
    {
        const PlanarTree hk = subdivide(h, k);
        CHECK(essential_ids(hk) == essential_ids(h));
        CHECK(hk.id(0) == h.id(0));
        for (Vertex v = 0; v < hk.vertex_count(); ++v)
            if (!h.find(hk.id(v)))
                CHECK(hk.degree(v) == 2);
    }
    for (std::size_t a = 1; a <= 3; ++a)
        for (std::size_t b = 1; b <= 3; ++b)
            CHECK(subdivide(subdivide(h, a), b).vertex_count() == subdivide(h, a * b).vertex_count());
}

TEST_CASE("document round trip")
{
    const PlanarTree h = parse_tree(kH);
    const PlanarTree back = parse_tree(to_json(h).dump());
    CHECK(back.fingerprint() == h.fingerprint());
}
