/**
 * Report builders behind the command-line tool. Each returns a JSON document
 * (schema 1); writing files is left to the caller.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "closedform.hpp"
#include "dconfig.hpp"
#include "exclusion.hpp"
#include "graph.hpp"
#include "markov.hpp"
#include "simulate.hpp"
#include "statistics.hpp"
#include "tree.hpp"

namespace treewind {

using nlohmann::json;

inline json matrix_json(const Matrix& M)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i)
    {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            row.push_back(M(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline json tree_summary(const PlanarTree& tree)
{
    return {{"name", tree.name()},
            {"hash", tree.fingerprint()},
            {"vertices", tree.vertex_count()},
            {"edges", tree.edge_count()},
            {"max_degree", tree.max_degree()}};
}

/// Everything needed for winding on one tree: census, chain, basis.
struct WindingModel {
    Census census;
    ExclusionProcess process;
    WindingBasis basis;

    WindingModel(const PlanarTree& tree, std::size_t n, std::vector<int> signs = {})
        : census(tree, n), process(tree, n), basis(build_basis_statistics(census, process.chain(), std::move(signs)))
    {
    }

    const FiniteChain& chain() const { return process.chain(); }
    const PlanarTree& tree() const { return census.tree(); }

    /// Input id of the essential vertex of basis element i.
    std::string vertex_id(std::size_t i) const { return tree().id(basis.anchors.at(i)); }
};

inline json classify_report(const Census& census)
{
    const PlanarTree& tree = census.tree();
    json basis = json::array();
    for (std::size_t b = 0; b < census.rank(); ++b)
    {
        const std::size_t cell = census.critical()[b];
        basis.push_back({{"index", b + 1},
                         {"cell", census.describe(cell)},
                         {"vertex", census.cells()[cell].edge.tau},
                         {"vertex_id", tree.id(census.cells()[cell].edge.tau)}});
    }
    std::vector<std::string> essential;
    for (Vertex v : tree.essential_vertices())
        essential.push_back(tree.id(v));
    json out{{"schema", 1},
             {"tree", tree_summary(tree)},
             {"n", census.particles()},
             {"zero_cells", census.zero_cell_count()},
             {"one_cells", census.cells().size()},
             {"counts",
              {{"critical", census.count(CellClass::Critical)},
               {"collapsible", census.count(CellClass::Collapsible)},
               {"residual", census.count(CellClass::Residual)}}},
             {"g", census.rank()},
             {"essential_vertices", essential},
             {"basis", basis},
             {"multi_lift_cells", census.multi_lift_count()},
             {"collapsible_spanning_tree",
              census.count(CellClass::Collapsible) + 1 == census.zero_cell_count() &&
                  census.collapsible_components() == 1}};
    if (census.rank() == 0)
        out["note"] = "configuration space is simply connected at H1 level";
    return out;
}

struct CovarianceSummary {
    Matrix sigma;
    Matrix stated;
    std::vector<std::vector<Interval>> bounds;
    bool bounds_ok = true;
    bool displays_ok = true;
    json report;
};

inline json interval_json(const Interval& iv, double value)
{
    return {{"lo", iv.lo}, {"hi", iv.hi}, {"rule", iv.rule}, {"value", value}, {"contains", iv.contains(value)}};
}

/// Exact covariance report for a winding model.
inline CovarianceSummary covariance_report(const WindingModel& m)
{
    CovarianceSummary out;
    const std::size_t g = m.basis.rank();
    const PlanarTree& tree = m.tree();
    const std::size_t n = m.census.particles();
    const double E = static_cast<double>(tree.edge_count());
    const double states = static_cast<double>(m.chain().size());

    json basis = json::array();
    for (std::size_t i = 0; i < g; ++i)
        basis.push_back({{"index", i + 1},
                         {"cell", m.basis.labels[i]},
                         {"vertex", m.basis.anchors[i]},
                         {"vertex_id", m.vertex_id(i)},
                         {"lifts", m.basis.lift_count(i)},
                         {"lift_mass", m.basis.lift_mass(i)}});
    json& r = out.report;
    r = {{"schema", 1},
         {"tree", tree_summary(tree)},
         {"n", n},
         {"states", m.chain().size()},
         {"g", g},
         {"basis", basis},
         {"signs", m.basis.signs}};
    if (g == 0)
    {
        r["sigma"] = json::array();
        r["bounds"] = json::array();
        r["note"] = "empty basis: covariance is the 0x0 matrix";
        return out;
    }

    const WindingCovariance cov(m.chain(), m.basis);
    const Spectrum& spec = cov.chain_spectrum();
    out.sigma = cov.covariance();
    out.stated = cov.stated_offdiagonal();
    out.bounds = cov.bounds();
    r["spectrum"] = {{"delta", spec.gap}, {"gamma_min", spec.smallest}};
    r["green_residual"] = cov.green_function().residual();
    r["sigma"] = matrix_json(out.sigma);
    r["sigma_min_eigenvalue"] = min_eigenvalue(out.sigma);

    json bounds = json::array();
    for (std::size_t i = 0; i < g; ++i)
    {
        json row = json::array();
        for (std::size_t j = 0; j < g; ++j)
        {
            row.push_back(interval_json(out.bounds[i][j], out.sigma(i, j)));
            out.bounds_ok = out.bounds_ok && out.bounds[i][j].contains(out.sigma(i, j));
        }
        bounds.push_back(row);
    }
    r["bounds"] = bounds;
    r["bounds_contain_sigma"] = out.bounds_ok;

    // Planar winding PW = sum eps_i W_i.
    std::vector<double> eps(m.basis.signs.begin(), m.basis.signs.end());
    const Interval pw_bound = cov.bound(eps);
    const double pw_var = cov.quadform(eps);
    json planar{{"variance", pw_var}, {"bound", interval_json(pw_bound, pw_var)}};

    // Reconciliation: printed formulas next to computed values.
    json recon = json::array();
    json stated = json::array();
    double stated_max = 0;
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = i + 1; j < g; ++j)
        {
            stated.push_back({{"i", i + 1},
                              {"j", j + 1},
                              {"stated", out.stated(i, j)},
                              {"computed", out.sigma(i, j)},
                              {"residual", out.stated(i, j) - out.sigma(i, j)}});
            stated_max = std::max(stated_max, std::abs(out.stated(i, j) - out.sigma(i, j)));
        }
    recon.push_back({{"claim", "off-diagonal entry equals 2<G f_i, f_j>"},
                     {"entries", stated},
                     {"max_residual", stated_max},
                     {"note", "computed entries use polarization of the quadratic form, which gives -2<G f_i, f_j>"}});

    const double binom_states = states;
    const double inv_gap = 1.0 / spec.gap, inv_top = 1.0 / (1.0 - spec.smallest);
    json diag = json::array();
    for (std::size_t i = 0; i < g; ++i)
    {
        const double c = static_cast<double>(m.basis.lift_count(i)) / (binom_states * E * E);
        const Interval iv{c * (E - inv_gap), c * (E - inv_top), "winding_display"};
        out.displays_ok = out.displays_ok && iv.contains(out.sigma(i, i));
        diag.push_back(interval_json(iv, out.sigma(i, i)));
    }
    recon.push_back({{"claim", "diagonal display (#e_i)/(C(E+1,n)E^2)(E - 1/delta) .. (E - 1/(1-gamma_min))"},
                     {"entries", diag}});

    const double V = static_cast<double>(tree.vertex_count());
    json off = json::array();
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = i + 1; j < g; ++j)
        {
            const double cnt = static_cast<double>(m.basis.lift_count(i) + m.basis.lift_count(j));
            const double s = cov.norm2(i) + cov.norm2(j) + 2.0 * cov.cross(i, j);
            const double den = 2.0 * binom_states * (V - 1) * (V - 1);
            const Interval iv{cnt * inv_top / den - s * inv_gap + cov.cross_variance(i, j),
                              cnt * inv_gap / den - s * inv_top + cov.cross_variance(i, j), "winding_display_A=V"};
            out.displays_ok = out.displays_ok && iv.contains(out.sigma(i, j));
            json e = interval_json(iv, out.sigma(i, j));
            e["i"] = i + 1;
            e["j"] = j + 1;
            off.push_back(e);
        }
    recon.push_back({{"claim", "off-diagonal display with A read as V"}, {"entries", off}});

    const double per_move = m.chain().transition().rows() > 1 ? 1.0 / (2.0 * E) : 0.0;
    recon.push_back({{"claim", "f~_i takes the value 1/(2(E-1)) at lifted tails"},
                     {"stated", E > 1 ? 1.0 / (2.0 * (E - 1.0)) : 0.0},
                     {"used", per_move},
                     {"note", "statistics are built from the transition matrix, one move has probability 1/(2E)"}});

    if (tree.max_degree() <= 3)
    {
        const double N = static_cast<double>(m.census.noncollapsible().size());
        Vector F = cov.combined(eps);
        const double n2 = cov.inner(F, F);
        const Interval iv{N / (E * states) - 2 * n2 * inv_gap, N / (E * states) - 2 * n2 * inv_top,
                          "planar_display"};
        recon.push_back({{"claim", "planar winding display N/(E C(E+1,n)) - 2||sum eps_i f~_i||^2 / ..."},
                         {"entry", interval_json(iv, pw_var)},
                         {"N", N},
                         {"lifted_cells", m.basis.cells.size()}});
    }
    r["planar"] = planar;
    r["displays_contain_sigma"] = out.displays_ok;
    r["reconciliation"] = recon;
    return out;
}

struct CompareResult {
    std::string verdict;
    double max_diff = 0;
    std::vector<std::size_t> permutation;
    std::vector<int> signs;
    json report;
};

/// Sigma_A against Sigma_B, then against D P Sigma_B P^T D over all signed permutations for g <= 5.
inline CompareResult compare_covariances(const Matrix& A, const Matrix& B, double tol = 1e-9)
{
    CompareResult out;
    if (A.rows() != B.rows())
    {
        out.verdict = "distinguished";
        out.max_diff = std::numeric_limits<double>::infinity();
        return out;
    }
    const std::size_t g = static_cast<std::size_t>(A.rows());
    out.max_diff = g ? (A - B).cwiseAbs().maxCoeff() : 0.0;
    if (out.max_diff <= tol)
    {
        out.verdict = "identical";
        return out;
    }
    out.verdict = "distinguished";
    if (g > 5)
        return out;
    std::vector<std::size_t> perm(g);
    std::iota(perm.begin(), perm.end(), 0);
    do
    {
        for (std::size_t mask = 0; mask < (std::size_t{1} << g); ++mask)
        {
            double worst = 0;
            for (std::size_t i = 0; i < g && worst <= tol; ++i)
                for (std::size_t j = 0; j < g; ++j)
                {
                    const double si = (mask >> i) & 1 ? -1.0 : 1.0, sj = (mask >> j) & 1 ? -1.0 : 1.0;
                    worst = std::max(worst, std::abs(A(i, j) - si * sj * B(perm[i], perm[j])));
                }
            if (worst <= tol)
            {
                out.verdict = "equivalent-up-to-basis";
                out.permutation = perm;
                for (std::size_t i = 0; i < g; ++i)
                    out.signs.push_back((mask >> i) & 1 ? -1 : 1);
                return out;
            }
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

inline json compare_report(const WindingModel& a, const WindingModel& b)
{
    const auto ra = covariance_report(a);
    const auto rb = covariance_report(b);
    auto cmp = compare_covariances(ra.sigma, rb.sigma);
    auto labels = [](const WindingModel& m) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < m.basis.rank(); ++i)
            out.push_back(m.vertex_id(i));
        return out;
    };
    json r{{"schema", 1},
           {"n", a.census.particles()},
           {"tree_a", tree_summary(a.tree())},
           {"tree_b", tree_summary(b.tree())},
           {"basis_a", labels(a)},
           {"basis_b", labels(b)},
           {"sigma_a", matrix_json(ra.sigma)},
           {"sigma_b", matrix_json(rb.sigma)},
           {"max_diff", std::isfinite(cmp.max_diff) ? json(cmp.max_diff) : json("dimension mismatch")},
           {"tolerance", 1e-9},
           {"verdict", cmp.verdict}};
    if (cmp.verdict == "equivalent-up-to-basis")
    {
        std::vector<std::size_t> one_based;
        for (auto p : cmp.permutation)
            one_based.push_back(p + 1);
        r["permutation"] = one_based;
        r["signs"] = cmp.signs;
    }
    return r;
}

inline json residual_entry(const std::string& name, double expected, double computed, double tol)
{
    const double res = std::abs(expected - computed);
    return {{"name", name}, {"expected", expected}, {"computed", computed}, {"residual", res}, {"ok", res <= tol}};
}

inline json star_report(std::size_t l)
{
    detail::require_star(l);
    const PlanarTree tree = PlanarTree::star(l);
    const WindingModel m(tree, 2);
    const FiniteChain& chain = m.chain();
    const Spectrum spec = spectrum(chain);
    const GreenFunction G(chain);
    const Matrix Q = hitting_times(chain);
    bool all_ok = true;

    json spectrum_rows = json::array();
    std::size_t cursor = 0;
    auto sorted = star_spectrum(l);
    std::sort(sorted.begin(), sorted.end(), [](const Eigenvalue& a, const Eigenvalue& b) { return a.value < b.value; });
    for (const auto& ev : sorted)
    {
        double worst = 0;
        for (std::size_t k = 0; k < ev.multiplicity; ++k, ++cursor)
            worst = std::max(worst, std::abs(spec.eigenvalues.at(cursor) - to_double(ev.value)));
        const double cp = ev.multiplicity ? to_double(star_charpoly(l, ev.value)) : 0.0;
        const double cb = ev.multiplicity ? star_charpoly_blocks(l, to_double(ev.value)) : 0.0;
        const bool ok = worst <= 1e-9 && std::abs(cp) <= 1e-8 && std::abs(cb) <= 1e-8;
        all_ok = all_ok && ok;
        spectrum_rows.push_back({{"value", to_double(ev.value)},
                                 {"exact", ev.value.str()},
                                 {"multiplicity", ev.multiplicity},
                                 {"max_residual", worst},
                                 {"charpoly_closed_form", cp},
                                 {"charpoly_blocks", cb},
                                 {"ok", ok}});
    }
    all_ok = all_ok && cursor == spec.eigenvalues.size();

    json hitting = json::array();
    for (const auto& e : star_hitting(l))
    {
        if (!e.applicable)
        {
            hitting.push_back({{"name", e.name}, {"applicable", false}, {"note", "needs l ≥ 4"}});
            continue;
        }
        json row = residual_entry(e.name, to_double(e.value), Q(colex_rank(e.x), colex_rank(e.y)), 1e-8);
        row["exact"] = e.value.str();
        all_ok = all_ok && row["ok"].get<bool>();
        hitting.push_back(row);
    }

    auto green_rows = [&](const std::vector<StarEntry>& table, bool& ok_all) {
        json rows = json::array();
        for (const auto& e : table)
        {
            if (!e.applicable)
            {
                rows.push_back({{"name", e.name}, {"applicable", false}, {"note", "needs l ≥ 4"}});
                continue;
            }
            json row = residual_entry(e.name, to_double(e.value), G(colex_rank(e.x), colex_rank(e.y)), 1e-9);
            row["exact"] = e.value.str();
            ok_all = ok_all && row["ok"].get<bool>();
            rows.push_back(row);
        }
        return rows;
    };
    bool printed_ok = true, rebuilt_ok = true;
    const json printed = green_rows(star_green(l), printed_ok);
    const json rebuilt = green_rows(star_green_from_hitting(l), rebuilt_ok);
    const auto via = green_via_hitting(chain, Q, G);

    const auto cov = covariance_report(m);
    const StarBounds sb = star_bounds(l);
    json cov_rows = json::array();
    bool bounds_ok = true;
    for (Eigen::Index i = 0; i < cov.sigma.rows(); ++i)
        for (Eigen::Index j = 0; j < cov.sigma.cols(); ++j)
        {
            const double v = cov.sigma(i, j);
            const double lo = i == j ? 0.0 : to_double(sb.offdiagonal_lo);
            const double hi = i == j ? to_double(sb.diagonal_hi) : to_double(sb.offdiagonal_hi);
            const bool in = v >= lo - 1e-12 && v <= hi + 1e-12;
            bounds_ok = bounds_ok && in;
            cov_rows.push_back({{"i", i + 1}, {"j", j + 1}, {"value", v}, {"lo", lo}, {"hi", hi}, {"contains", in}});
        }

    return {{"schema", 1},
            {"l", l},
            {"states", chain.size()},
            {"spectrum", spectrum_rows},
            {"hitting_times", hitting},
            {"green_printed", printed},
            {"green_printed_ok", printed_ok},
            {"green_from_hitting", rebuilt},
            {"green_from_hitting_ok", rebuilt_ok},
            {"green_via_hitting_max_discrepancy", via.max_discrepancy},
            {"green_residual", G.residual()},
            {"covariance", cov.report},
            {"printed_bounds", cov_rows},
            {"printed_bounds_ok", bounds_ok},
            {"spectrum_and_hitting_ok", all_ok}};
}

/// Lazy walk on K_n with the star spanning tree at vertex 0.
struct CompleteModel {
    SimpleGraph graph;
    FiniteChain chain;
    SpanningTree tree;
    std::vector<std::pair<std::size_t, std::size_t>> complement;
    WindingBasis basis;

    explicit CompleteModel(std::size_t n)
        : graph(SimpleGraph::complete(n)), chain(lazy_walk(graph)), tree(bfs_spanning_tree(graph, 0)),
          complement(complement_edges(graph, tree)), basis(complement_basis(chain, complement))
    {
    }
};

inline json complete_report(std::size_t n, std::optional<McResult> mc = std::nullopt)
{
    const CompleteRules rules = complete_cov(n);
    const CompleteModel m(n);
    const WindingCovariance cov(m.chain, m.basis);
    const Matrix S = cov.covariance();
    const Matrix stated = cov.stated_offdiagonal();
    const std::size_t g = m.basis.rank();
    json diag = json::array(), disjoint = json::array(), adjacent = json::array();
    bool diag_ok = true, disjoint_ok = true, mc_ok = true;
    for (std::size_t i = 0; i < g; ++i)
    {
        diag.push_back(residual_entry(m.basis.labels[i], to_double(rules.diagonal), S(i, i), 1e-12));
        diag_ok = diag_ok && diag.back()["ok"].get<bool>();
        for (std::size_t j = i + 1; j < g; ++j)
        {
            const EdgePair kind = classify_pair(m.complement[i], m.complement[j]);
            const std::string name = m.basis.labels[i] + "~" + m.basis.labels[j];
            if (kind == EdgePair::Disjoint)
            {
                disjoint.push_back(residual_entry(name, 0.0, S(i, j), 1e-12));
                disjoint_ok = disjoint_ok && disjoint.back()["ok"].get<bool>();
                continue;
            }
            json row{{"name", name},
                     {"case", to_string(kind)},
                     {"printed", to_double(rules.value(kind))},
                     {"computed", S(i, j)},
                     {"stated_formula", stated(i, j)},
                     {"printed_residual", to_double(rules.value(kind)) - S(i, j)}};
            if (mc)
            {
                const double se = mc->stderr_(i, j);
                const double z = se > 0 ? (S(i, j) - mc->sigma(i, j)) / se : 0.0;
                const double zp = se > 0 ? (to_double(rules.value(kind)) - mc->sigma(i, j)) / se : 0.0;
                row["monte_carlo"] = {{"estimate", mc->sigma(i, j)}, {"se", se}, {"z_computed", z}, {"z_printed", zp}};
                mc_ok = mc_ok && std::abs(z) <= 4.0;
            }
            adjacent.push_back(row);
        }
    }
    json r{{"schema", 1},
           {"n", n},
           {"spanning_tree", "star at vertex 0"},
           {"g", g},
           {"pi_E", to_double(rules.pi_E)},
           {"green_residual", cov.green_function().residual()},
           {"sigma", matrix_json(S)},
           {"diagonal", diag},
           {"diagonal_ok", diag_ok},
           {"disjoint", disjoint},
           {"disjoint_ok", disjoint_ok},
           {"adjacent", adjacent}};
    if (mc)
    {
        r["monte_carlo"] = {{"steps", mc->t}, {"reps", mc->reps}, {"seed", mc->seed}, {"generator", kGeneratorName}};
        r["adjacent_within_4se"] = mc_ok;
    }
    return r;
}

/// Monte Carlo report: estimate, exact value, z-scores and CLT diagnostics.
inline json simulate_report(const WindingModel& m, const McResult& mc, const std::vector<std::vector<double>>& dirs)
{
    const std::size_t g = m.basis.rank();
    json r{{"schema", 1},
           {"tree", tree_summary(m.tree())},
           {"n", m.census.particles()},
           {"g", g},
           {"steps", mc.t},
           {"reps", mc.reps},
           {"seed", mc.seed},
           {"generator", kGeneratorName},
           {"sigma_hat", matrix_json(mc.sigma)},
           {"stderr", matrix_json(mc.stderr_)}};
    if (g == 0)
        return r;
    const Matrix S = exact_covariance(m.chain(), m.basis);
    Matrix z = Matrix::Zero(S.rows(), S.cols());
    double worst = 0;
    for (Eigen::Index i = 0; i < S.rows(); ++i)
        for (Eigen::Index j = 0; j < S.cols(); ++j)
            if (mc.stderr_(i, j) > 0)
            {
                z(i, j) = (mc.sigma(i, j) - S(i, j)) / mc.stderr_(i, j);
                worst = std::max(worst, std::abs(z(i, j)));
            }
    std::vector<double> mean_z;
    for (Eigen::Index i = 0; i < mc.mean.size(); ++i)
        mean_z.push_back(mc.mean_se(i) > 0 ? mc.mean(i) / mc.mean_se(i) : 0.0);
    json ks = json::array();
    for (const auto& k : clt_diagnostics(mc.samples, S, dirs))
    {
        json e{{"direction", k.direction}, {"variance", k.variance}};
        if (k.skipped)
            e["note"] = k.note;
        else
            e["ks"] = k.distance;
        ks.push_back(e);
    }
    r["sigma_exact"] = matrix_json(S);
    r["z_scores"] = matrix_json(z);
    r["max_abs_z"] = worst;
    r["within_4se"] = worst <= 4.0;
    r["mean_z"] = mean_z;
    r["clt"] = ks;
    return r;
}

/// Unit directions plus the planar-sign direction.
inline std::vector<std::vector<double>> default_directions(const WindingBasis& basis)
{
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < basis.rank(); ++i)
    {
        std::vector<double> e(basis.rank(), 0.0);
        e[i] = 1.0;
        out.push_back(e);
    }
    if (basis.rank() > 1)
        out.emplace_back(basis.signs.begin(), basis.signs.end());
    return out;
}

} // namespace treewind
