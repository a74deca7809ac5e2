// treewind: command-line front end.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <treewind/commands.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace treewind;

namespace {

struct Options {
    std::string tree, tree2, signs, out;
    std::size_t n = 2;
    std::size_t l = 3;
    std::uint64_t steps = 100000;
    std::size_t reps = 1000;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;
    bool trace = false;
    bool force = false;
    bool stationary = false;
};

class Output {
public:
    Output(const Options& o) : dir_(o.out), force_(o.force) {}

    bool to_files() const { return !dir_.empty(); }

    /// Refuse before any work if a target exists.
    void reserve(const std::vector<std::string>& names) const
    {
        if (dir_.empty())
            return;
        for (const auto& name : names)
            if (fs::exists(fs::path(dir_) / name) && !force_)
                throw Error("exists", (fs::path(dir_) / name).string() + " exists; pass --force to overwrite");
    }

    void write(const std::string& name, const std::string& text) const
    {
        fs::create_directories(dir_);
        std::ofstream f(fs::path(dir_) / name, std::ios::binary);
        if (!f)
            throw Error("io", "cannot write " + (fs::path(dir_) / name).string());
        f << text;
    }

    void emit(const std::string& name, const json& doc) const
    {
        if (to_files())
            write(name, doc.dump(2) + "\n");
        else
            std::cout << doc.dump(2) << "\n";
    }

private:
    std::string dir_;
    bool force_;
};

PlanarTree require_tree(const std::string& path, const char* flag)
{
    if (path.empty())
        throw Error("usage", std::string(flag) + " is required");
    return load_tree(path);
}

std::vector<int> read_signs(const std::string& path)
{
    if (path.empty())
        return {};
    std::ifstream f(path);
    if (!f)
        throw Error("io", "cannot read " + path);
    json doc = json::parse(f);
    if (doc.is_object())
        doc = doc.at("signs");
    return doc.get<std::vector<int>>();
}

void cmd_classify(const Options& o)
{
    const Output out(o);
    out.reserve({"census.csv", "classify.json"});
    const Census census(require_tree(o.tree, "--tree"), o.n);
    if (out.to_files())
        out.write("census.csv", census.census_csv());
    out.emit("classify.json", classify_report(census));
}

void cmd_exact_cov(const Options& o)
{
    const Output out(o);
    out.reserve({"covariance.json"});
    const WindingModel m(require_tree(o.tree, "--tree"), o.n, read_signs(o.signs));
    out.emit("covariance.json", covariance_report(m).report);
}

void cmd_simulate(const Options& o)
{
    if (!o.seed)
        throw Error("usage", "--seed is required for simulate");
    if (o.reps < 2)
        throw Error("invalid_argument", "reps ≥ 2 required");
    const Output out(o);
    out.reserve({"samples.csv", "samples.meta.json", "simulate.json", "trace.csv"});
    const WindingModel m(require_tree(o.tree, "--tree"), o.n, read_signs(o.signs));
    const Start start = o.stationary ? Start::Stationary : Start::Smallest;
    const McResult mc = mc_covariance(m.chain(), m.basis, o.steps, o.reps, *o.seed, o.threads, start);
    const json report = simulate_report(m, mc, default_directions(m.basis));
    if (out.to_files())
    {
        out.write("samples.csv", samples_csv(mc));
        out.write("samples.meta.json", sample_metadata(mc, m.basis, m.tree().fingerprint(), start).dump(2) + "\n");
        if (o.trace)
        {
            std::vector<std::size_t> states;
            run_winding(m.census, m.chain(), m.basis.signs, o.steps, *o.seed, 0, start, &states);
            std::string text = "step,state\n";
            for (std::size_t k = 0; k < states.size(); ++k)
                text += std::to_string(k) + ",\"" + m.chain().name(states[k]) + "\"\n";
            out.write("trace.csv", text);
        }
    }
    out.emit("simulate.json", report);
}

void cmd_compare(const Options& o)
{
    const Output out(o);
    out.reserve({"compare.json"});
    const WindingModel a(require_tree(o.tree, "--tree"), o.n);
    const WindingModel b(require_tree(o.tree2, "--tree2"), o.n);
    out.emit("compare.json", compare_report(a, b));
}

void cmd_star_report(const Options& o)
{
    const Output out(o);
    out.reserve({"star_report.json"});
    out.emit("star_report.json", star_report(o.l));
}

void cmd_complete_report(const Options& o)
{
    const Output out(o);
    out.reserve({"complete_report.json"});
    std::optional<McResult> mc;
    if (o.seed)
    {
        const CompleteModel m(o.n);
        mc = mc_covariance(m.chain, m.basis, o.steps, o.reps, *o.seed, o.threads);
    }
    out.emit("complete_report.json", complete_report(o.n, mc));
}

int fail(const std::string& code, const std::string& message, int status)
{
    std::cerr << json{{"error", code}, {"message", message}}.dump() << "\n";
    return status;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Winding statistics of exclusion processes on planar trees"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--tree", o.tree, "tree document (JSON)");
        sub->add_option("--n", o.n, "particle count")->capture_default_str();
        sub->add_option("--signs", o.signs, "JSON array of planar signs");
        sub->add_option("--out", o.out, "output directory (stdout when omitted)");
        sub->add_flag("--force", o.force, "overwrite existing outputs");
    };
    auto sampling = [&](CLI::App* sub) {
        sub->add_option("--steps", o.steps, "steps per replicate")->capture_default_str();
        sub->add_option("--reps", o.reps, "replicates")->capture_default_str();
        sub->add_option("--seed", o.seed, "master seed");
        sub->add_option("--threads", o.threads, "worker threads")->capture_default_str();
    };

    auto* classify = app.add_subcommand("classify", "cell census and critical basis");
    common(classify);
    auto* exact = app.add_subcommand("exact-cov", "exact covariance, bounds and reconciliation");
    common(exact);
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo winding samples and CLT diagnostics");
    common(simulate);
    sampling(simulate);
    simulate->add_flag("--trace", o.trace, "write the state sequence of replicate 0");
    simulate->add_flag("--stationary", o.stationary, "start each replicate from the stationary distribution");
    auto* compare = app.add_subcommand("compare", "compare covariance matrices of two trees");
    common(compare);
    compare->add_option("--tree2", o.tree2, "second tree document");
    auto* star = app.add_subcommand("star-report", "star closed forms against the generic machinery");
    star->add_option("--l", o.l, "leaf count")->capture_default_str();
    star->add_option("--out", o.out, "output directory");
    star->add_flag("--force", o.force, "overwrite existing outputs");
    auto* complete = app.add_subcommand("complete-report", "complete-graph covariance rules (--n is the graph size)");
    complete->add_option("--n", o.n, "number of vertices")->required();
    complete->add_option("--out", o.out, "output directory");
    complete->add_flag("--force", o.force, "overwrite existing outputs");
    sampling(complete);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        return fail("usage", e.what(), 2);
    }

    try
    {
        if (o.threads == 0)
            o.threads = std::max(1u, std::thread::hardware_concurrency());
        if (*classify)
            cmd_classify(o);
        else if (*exact)
            cmd_exact_cov(o);
        else if (*simulate)
            cmd_simulate(o);
        else if (*compare)
            cmd_compare(o);
        else if (*star)
            cmd_star_report(o);
        else if (*complete)
            cmd_complete_report(o);
    }
    catch (const Error& e)
    {
        return fail(e.code(), e.what(), e.code() == "usage" ? 2 : 1);
    }
    catch (const std::exception& e)
    {
        return fail("error", e.what(), 1);
    }
    return 0;
}
