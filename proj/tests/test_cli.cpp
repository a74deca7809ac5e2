#include <catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int status = -1;
    std::string out;
    std::string err;
};

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("treewind_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

Run run(const std::string& args)
{
    static int counter = 0;
    const fs::path err = fs::temp_directory_path() / ("treewind_cli_err_" + std::to_string(counter++));
    const std::string cmd = std::string(TREEWIND_CLI) + " " + args + " 2>" + err.string();
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
        r.out.append(buf.data(), got);
    const int st = pclose(pipe);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    r.err = slurp(err);
    fs::remove(err);
    return r;
}

std::string tree(const std::string& name) { return std::string(TREEWIND_TREES "/") + name; }

} // namespace

TEST_CASE("classify")
{
    const Run r = run("classify --tree " + tree("h_graph.json"));
    REQUIRE(r.status == 0);
    const json j = json::parse(r.out);
    CHECK(j["schema"] == 1);
    CHECK(j["g"] == 2);
    CHECK(j["collapsible_spanning_tree"] == true);

    const fs::path dir = scratch("classify");
    CHECK(run("classify --tree " + tree("g1.json") + " --out " + dir.string()).status == 0);
    CHECK(fs::exists(dir / "census.csv"));
    CHECK(json::parse(slurp(dir / "classify.json"))["g"] == 4);

    const Run again = run("classify --tree " + tree("g1.json") + " --out " + dir.string());
    CHECK(again.status == 1);
    CHECK(json::parse(again.err)["error"] == "exists");
    CHECK(run("classify --tree " + tree("g1.json") + " --out " + dir.string() + " --force").status == 0);

    const Run path = run("classify --tree " + tree("path5.json"));
    REQUIRE(path.status == 0);
    CHECK(json::parse(path.out)["g"] == 0);
    CHECK(json::parse(path.out).contains("note"));
}

TEST_CASE("errors are reported as JSON")
{
    const fs::path dir = scratch("errors");
    std::ofstream(dir / "cycle.json") << R"({"root": "a", "children": {"a": ["b"], "b": ["a"]}})";
    const Run bad = run("classify --tree " + (dir / "cycle.json").string());
    CHECK(bad.status == 1);
    CHECK(json::parse(bad.err)["error"] == "cycle_detected");

    const Run missing = run("classify --tree " + (dir / "nope.json").string());
    CHECK(missing.status == 1);
    CHECK(json::parse(missing.err)["error"] == "io");

    const Run pc = run("classify --tree " + tree("star3.json") + " --n 3");
    CHECK(pc.status == 1);
    CHECK(json::parse(pc.err)["error"] == "path_condition");

    CHECK(run("classify").status == 2);
    CHECK(run("frobnicate").status == 2);
    CHECK(run("simulate --tree " + tree("star3.json")).status == 2);
}

TEST_CASE("exact-cov")
{
    const Run r = run("exact-cov --tree " + tree("star3.json"));
    REQUIRE(r.status == 0);
    const json j = json::parse(r.out);
    CHECK_THAT(j["sigma"][0][0].get<double>(), Catch::Matchers::WithinAbs(1.0 / 108.0, 1e-12));
    CHECK(j["bounds_contain_sigma"] == true);
    CHECK(j.contains("reconciliation"));

    const fs::path dir = scratch("signs");
    std::ofstream(dir / "signs.json") << "[1, -1]";
    const Run s = run("exact-cov --tree " + tree("h_graph.json") + " --signs " + (dir / "signs.json").string());
    CHECK(s.status == 0);
    std::ofstream(dir / "short.json") << "[1]";
    const Run bad = run("exact-cov --tree " + tree("h_graph.json") + " --signs " + (dir / "short.json").string());
    CHECK(bad.status == 1);
    CHECK(json::parse(bad.err)["error"] == "dimension_mismatch");
}

TEST_CASE("simulate is reproducible")
{
    const fs::path a = scratch("sim_a"), b = scratch("sim_b");
    const std::string base = "simulate --tree " + tree("star4.json") + " --steps 2000 --reps 40 --seed 17 --trace";
    REQUIRE(run(base + " --out " + a.string()).status == 0);
    REQUIRE(run(base + " --threads 3 --out " + b.string()).status == 0);
    CHECK(slurp(a / "samples.csv") == slurp(b / "samples.csv"));
    CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
    const json meta = json::parse(slurp(a / "samples.meta.json"));
    CHECK(meta["seed"] == 17);
    CHECK(meta["generator"] == "mt19937_64");
    CHECK(meta["basis"].size() == 3);
    const std::string csv = slurp(a / "samples.csv");
    CHECK(csv.rfind("rep,t,w_1,w_2,w_3,pw\n", 0) == 0);
    CHECK(json::parse(slurp(a / "simulate.json")).contains("clt"));

    const Run one = run("simulate --tree " + tree("star4.json") + " --reps 1 --seed 3");
    CHECK(one.status == 1);
    CHECK(json::parse(one.err)["error"] == "invalid_argument");
}

TEST_CASE("compare verdicts")
{
    auto verdict = [](const std::string& a, const std::string& b) {
        const Run r = run("compare --tree " + tree(a) + " --tree2 " + tree(b));
        REQUIRE(r.status == 0);
        return json::parse(r.out)["verdict"].get<std::string>();
    };
    CHECK(verdict("g1.json", "g2.json") == "distinguished");
    CHECK(verdict("star4.json", "star4_mirror.json") == "identical");
    CHECK(verdict("fork.json", "fork_swapped.json") == "equivalent-up-to-basis");
    CHECK(verdict("star3.json", "star4.json") == "distinguished");
}

TEST_CASE("star-report")
{
    const Run r = run("star-report --l 4");
    REQUIRE(r.status == 0);
    const json j = json::parse(r.out);
    CHECK(j["spectrum_and_hitting_ok"] == true);
    CHECK(j["green_from_hitting_ok"] == true);
    CHECK(j["green_printed_ok"] == false);
    CHECK(j["printed_bounds_ok"] == true);

    const Run bad = run("star-report --l 2");
    CHECK(bad.status == 1);
    CHECK(json::parse(bad.err)["error"] == "invalid_argument");
}

TEST_CASE("complete-report")
{
    const Run r = run("complete-report --n 5");
    REQUIRE(r.status == 0);
    const json j = json::parse(r.out);
    CHECK(j["diagonal_ok"] == true);
    CHECK(j["disjoint_ok"] == true);
    CHECK_FALSE(j.contains("monte_carlo"));

    const Run mc = run("complete-report --n 4 --steps 2000 --reps 400 --seed 5");
    REQUIRE(mc.status == 0);
    CHECK(json::parse(mc.out).contains("adjacent_within_4se"));
    CHECK(run("complete-report --n 2").status == 1);
}
