/**
 * Trajectory simulation, accumulated homology and Monte Carlo estimates of
 * the winding covariance.
 *
 * Generator: std::mt19937_64. Replicate r of master seed s is seeded with
 * std::seed_seq{lo32(s), hi32(s), lo32(r), hi32(r)}. Uniform doubles take the
 * top 53 bits of one draw. Each chain row is sampled through an alias table.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dconfig.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "markov.hpp"
#include "statistics.hpp"

namespace treewind {

inline constexpr const char* kGeneratorName = "mt19937_64";
inline constexpr const char* kSeedDerivation = "seed_seq{seed_lo32, seed_hi32, rep_lo32, rep_hi32}";

class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

/**
 * Signed crossing counts of complement edges along a vertex path.
 * Tree edges contribute nothing, so this is the homology class of the path
 * closed up through the spanning tree.
 */
inline std::vector<std::int64_t> accumulated_homology(std::span<const std::size_t> path, const SimpleGraph& graph,
                                                      const std::vector<std::pair<std::size_t, std::size_t>>& complement)
{
    std::vector<std::int64_t> h(complement.size(), 0);
    for (std::size_t k = 0; k + 1 < path.size(); ++k)
    {
        const std::size_t a = path[k], b = path[k + 1];
        if (a == b)
            continue;
        if (a >= graph.vertex_count() || b >= graph.vertex_count() || !graph.adjacent(a, b))
            throw Error("not_adjacent", "path steps between non-adjacent vertices " + std::to_string(a) + " and " +
                                            std::to_string(b));
        for (std::size_t i = 0; i < complement.size(); ++i)
        {
            if (complement[i] == std::pair{a, b})
                ++h[i];
            else if (complement[i] == std::pair{b, a})
                --h[i];
        }
    }
    return h;
}

/**
 * Samples a chain and keeps signed traversal counts of a list of tracked
 * directed moves: +1 along (from, to), -1 along (to, from).
 */
class ChainSampler {
public:
    ChainSampler(const FiniteChain& chain, const std::vector<std::pair<std::size_t, std::size_t>>& tracked)
        : slots_(tracked.size())
    {
        const Matrix& P = chain.transition();
        const std::size_t n = chain.size();
        rows_.resize(n);
        std::vector<std::vector<std::pair<std::size_t, int>>> lookup(n);
        for (std::size_t k = 0; k < tracked.size(); ++k)
        {
            const auto [a, b] = tracked[k];
            if (a >= n || b >= n || a == b)
                throw Error("invalid_argument", "tracked move out of range");
            lookup[a].emplace_back(b, static_cast<int>(k) + 1);
            lookup[b].emplace_back(a, -static_cast<int>(k) - 1);
        }
        for (std::size_t x = 0; x < n; ++x)
        {
            Row& row = rows_[x];
            std::vector<double> w;
            for (std::size_t y = 0; y < n; ++y)
                if (P(x, y) > 0.0)
                {
                    int code = 0;
                    for (const auto& [to, c] : lookup[x])
                        if (to == y)
                            code = c;
                    row.outcomes.push_back({y, code});
                    w.push_back(P(x, y));
                }
            build_alias(w, row);
        }
        pi_ = chain.stationary();
        std::vector<double> w(pi_.data(), pi_.data() + n);
        build_alias(w, start_);
    }

    std::size_t slot_count() const { return slots_; }
    std::size_t state_count() const { return rows_.size(); }

    std::size_t step(std::size_t x, Rng& rng, std::vector<std::int64_t>& counts) const
    {
        const Row& row = rows_[x];
        const Outcome& o = row.outcomes[draw(row, rng)];
        if (o.code > 0)
            ++counts[static_cast<std::size_t>(o.code - 1)];
        else if (o.code < 0)
            --counts[static_cast<std::size_t>(-o.code - 1)];
        return o.next;
    }

    std::size_t stationary_state(Rng& rng) const { return start_.outcomes[draw(start_, rng)].next; }

    /// Signed counts after `steps` moves from `start`; optionally records visited states.
    std::vector<std::int64_t> run(std::uint64_t steps, std::size_t start, Rng& rng,
                                  std::vector<std::size_t>* trace = nullptr) const
    {
        std::vector<std::int64_t> counts(slots_, 0);
        std::size_t x = start;
        if (trace)
            trace->assign(1, x);
        for (std::uint64_t s = 0; s < steps; ++s)
        {
            x = step(x, rng, counts);
            if (trace)
                trace->push_back(x);
        }
        return counts;
    }

private:
    struct Outcome {
        std::size_t next;
        int code;
    };
    struct Row {
        std::vector<Outcome> outcomes;
        std::vector<double> prob;
        std::vector<std::uint32_t> alias;
    };

    static std::size_t draw(const Row& row, Rng& rng)
    {
        const std::size_t k = row.outcomes.size();
        if (k == 1)
            return 0;
        const double u = rng.uniform() * static_cast<double>(k);
        const std::size_t i = std::min(static_cast<std::size_t>(u), k - 1);
        return u - static_cast<double>(i) < row.prob[i] ? i : row.alias[i];
    }

    void build_alias(const std::vector<double>& w, Row& row)
    {
        if (row.outcomes.empty())
            for (std::size_t i = 0; i < w.size(); ++i)
                row.outcomes.push_back({i, 0});
        const std::size_t k = w.size();
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        row.prob.assign(k, 1.0);
        row.alias.resize(k);
        std::iota(row.alias.begin(), row.alias.end(), 0u);
        std::vector<double> scaled(k);
        std::vector<std::size_t> small, large;
        for (std::size_t i = 0; i < k; ++i)
        {
            scaled[i] = w[i] * static_cast<double>(k) / total;
            (scaled[i] < 1.0 ? small : large).push_back(i);
        }
        while (!small.empty() && !large.empty())
        {
            const std::size_t s = small.back(), l = large.back();
            small.pop_back();
            row.prob[s] = scaled[s];
            row.alias[s] = static_cast<std::uint32_t>(l);
            scaled[l] -= 1.0 - scaled[s];
            if (scaled[l] < 1.0)
            {
                large.pop_back();
                small.push_back(l);
            }
        }
    }

    std::size_t slots_;
    std::vector<Row> rows_;
    Row start_;
    Vector pi_;
};

enum class Start { Smallest, Stationary };

struct WindingSample {
    std::size_t rep = 0;
    std::uint64_t t = 0;
    std::vector<std::int64_t> W;
    std::int64_t PW = 0;
};

inline std::int64_t planar_winding(const std::vector<std::int64_t>& W, const std::vector<int>& signs)
{
    std::int64_t s = 0;
    for (std::size_t i = 0; i < W.size(); ++i)
        s += signs.at(i) * W[i];
    return s;
}

/// Tracked moves of a basis, in basis-cell order.
inline std::vector<std::pair<std::size_t, std::size_t>> tracked_moves(const WindingBasis& basis)
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& c : basis.cells)
        out.emplace_back(c.from, c.to);
    return out;
}

inline std::vector<std::int64_t> project_basis(const WindingBasis& basis, const std::vector<std::int64_t>& counts)
{
    std::vector<std::int64_t> W(basis.rank(), 0);
    for (std::size_t c = 0; c < basis.cells.size(); ++c)
        for (const auto& [b, k] : basis.cells[c].over)
            W[b] += k * counts[c];
    return W;
}

/**
 * One winding trajectory of the exclusion chain: signed traversal counts of
 * every non-collapsible 1-cell, projected onto the critical basis.
 */
inline WindingSample run_winding(const Census& census, const FiniteChain& chain, const std::vector<int>& signs,
                                 std::uint64_t t, std::uint64_t seed, std::size_t rep = 0,
                                 Start start = Start::Smallest, std::vector<std::size_t>* trace = nullptr)
{
    std::vector<std::pair<std::size_t, std::size_t>> moves;
    for (std::size_t cell : census.noncollapsible())
        moves.emplace_back(census.low_state(cell), census.high_state(cell));
    const ChainSampler sampler(chain, moves);
    Rng rng(seed, rep);
    const std::size_t x0 = start == Start::Smallest ? 0 : sampler.stationary_state(rng);
    const auto counts = sampler.run(t, x0, rng, trace);
    WindingSample out{rep, t, census.project_counts<std::int64_t>(counts), 0};
    out.PW = planar_winding(out.W, signs);
    return out;
}

/// Winding of an explicit sequence of 0-cells (colex ranks); repeated states are holds.
inline std::vector<std::int64_t> path_winding(const Census& census, std::span<const std::size_t> states)
{
    const auto nc = census.noncollapsible();
    std::vector<std::int64_t> counts(nc.size(), 0);
    for (std::size_t k = 0; k + 1 < states.size(); ++k)
    {
        const std::size_t a = states[k], b = states[k + 1];
        if (a == b)
            continue;
        bool adjacent = false;
        for (std::size_t j = 0; j < nc.size(); ++j)
        {
            if (census.low_state(nc[j]) == a && census.high_state(nc[j]) == b)
                ++counts[j];
            else if (census.low_state(nc[j]) == b && census.high_state(nc[j]) == a)
                --counts[j];
            else
                continue;
            adjacent = true;
        }
        if (!adjacent)
        {
            const Config x = colex_unrank(a, census.particles()), y = colex_unrank(b, census.particles());
            std::vector<Vertex> gone, came;
            std::set_difference(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(gone));
            std::set_difference(y.begin(), y.end(), x.begin(), x.end(), std::back_inserter(came));
            if (gone.size() != 1 || came.size() != 1 || !census.tree().has_edge(gone[0], came[0]))
                throw Error("not_adjacent", "states " + std::to_string(a) + " and " + std::to_string(b) +
                                                " are not joined by a 1-cell");
        }
    }
    return census.project_counts<std::int64_t>(counts);
}

struct McResult {
    std::uint64_t t = 0;
    std::uint64_t seed = 0;
    std::size_t reps = 0;
    std::vector<WindingSample> samples;
    Matrix sigma;        // sample covariance of W / sqrt(t)
    Matrix stderr_;      // per-entry standard errors
    Vector mean;         // mean of W / sqrt(t)
    Vector mean_se;
};

/// Covariance estimate and its standard errors from scaled samples.
inline void summarize(McResult& r, const std::vector<int>& signs)
{
    const std::size_t R = r.samples.size();
    const std::size_t g = R ? r.samples.front().W.size() : 0;
    const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::uint64_t>(r.t, 1)));
    Matrix X(static_cast<Eigen::Index>(R), static_cast<Eigen::Index>(g));
    for (std::size_t k = 0; k < R; ++k)
    {
        r.samples[k].PW = planar_winding(r.samples[k].W, signs);
        for (std::size_t i = 0; i < g; ++i)
            X(k, i) = static_cast<double>(r.samples[k].W[i]) * scale;
    }
    const double Rd = static_cast<double>(R);
    r.mean = X.colwise().mean().transpose();
    const Matrix C = X.rowwise() - r.mean.transpose();
    r.sigma = C.transpose() * C / (Rd - 1.0);
    r.stderr_ = Matrix::Zero(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(g));
    r.mean_se = Vector::Zero(static_cast<Eigen::Index>(g));
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(g); ++i)
    {
        r.mean_se(i) = std::sqrt(r.sigma(i, i) / Rd);
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(g); ++j)
        {
            const Vector z = C.col(i).cwiseProduct(C.col(j));
            const double m = z.mean();
            const double v = (z.array() - m).square().sum() / (Rd - 1.0);
            r.stderr_(i, j) = std::sqrt(v / Rd);
        }
    }
}

/**
 * Independent replicates of W(t), split over `threads` workers in contiguous
 * blocks. Each replicate owns its stream, so the result does not depend on
 * the thread count.
 */
inline McResult mc_covariance(const FiniteChain& chain, const WindingBasis& basis, std::uint64_t t, std::size_t reps,
                              std::uint64_t seed, std::size_t threads = 1, Start start = Start::Smallest)
{
    if (reps < 2)
        throw Error("invalid_argument", "reps ≥ 2 required");
    const ChainSampler sampler(chain, tracked_moves(basis));
    McResult out;
    out.t = t;
    out.seed = seed;
    out.reps = reps;
    out.samples.resize(reps);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r)
        {
            Rng rng(seed, r);
            const std::size_t x0 = start == Start::Smallest ? 0 : sampler.stationary_state(rng);
            out.samples[r] = {r, t, project_basis(basis, sampler.run(t, x0, rng)), 0};
        }
    };
    threads = std::clamp<std::size_t>(threads, 1, reps);
    if (threads == 1)
        work(0, reps);
    else
    {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < threads; ++w)
            pool.emplace_back(work, reps * w / threads, reps * (w + 1) / threads);
        for (auto& th : pool)
            th.join();
    }
    summarize(out, basis.signs);
    return out;
}

inline std::string samples_csv(const McResult& r)
{
    std::ostringstream os;
    os << "rep,t";
    const std::size_t g = r.samples.empty() ? 0 : r.samples.front().W.size();
    for (std::size_t i = 1; i <= g; ++i)
        os << ",w_" << i;
    os << ",pw\n";
    for (const auto& s : r.samples)
    {
        os << s.rep << ',' << s.t;
        for (auto w : s.W)
            os << ',' << w;
        os << ',' << s.PW << '\n';
    }
    return os.str();
}

inline nlohmann::json sample_metadata(const McResult& r, const WindingBasis& basis, const std::string& tree_hash,
                                      Start start)
{
    return {{"schema", 1},
            {"seed", r.seed},
            {"generator", kGeneratorName},
            {"stream_derivation", kSeedDerivation},
            {"tree_hash", tree_hash},
            {"basis", basis.labels},
            {"signs", basis.signs},
            {"steps", r.t},
            {"reps", r.reps},
            {"start", start == Start::Smallest ? "smallest" : "stationary"}};
}

struct KsResult {
    std::vector<double> direction;
    double variance = 0;
    double distance = 0;
    bool skipped = false;
    std::string note;
};

/// Kolmogorov-Smirnov distance of sorted values to N(0, variance).
inline double ks_normal(std::vector<double> values, double variance)
{
    std::sort(values.begin(), values.end());
    const double sd = std::sqrt(variance);
    const double n = static_cast<double>(values.size());
    double d = 0;
    for (std::size_t k = 0; k < values.size(); ++k)
    {
        const double F = 0.5 * std::erfc(-values[k] / (sd * std::sqrt(2.0)));
        d = std::max({d, (static_cast<double>(k) + 1.0) / n - F, F - static_cast<double>(k) / n});
    }
    return d;
}

/// Per-direction KS distance of theta . W(t)/sqrt(t) to N(0, theta' Sigma theta).
inline std::vector<KsResult> clt_diagnostics(const std::vector<WindingSample>& samples, const Matrix& sigma,
                                             const std::vector<std::vector<double>>& directions)
{
    std::vector<KsResult> out;
    for (const auto& theta : directions)
    {
        KsResult r;
        r.direction = theta;
        if (theta.size() != static_cast<std::size_t>(sigma.rows()))
            throw Error("dimension_mismatch", "direction length does not match Sigma");
        const Vector th = Eigen::Map<const Vector>(theta.data(), static_cast<Eigen::Index>(theta.size()));
        r.variance = th.dot(sigma * th);
        if (r.variance <= 1e-14)
        {
            r.skipped = true;
            r.note = "degenerate direction";
            out.push_back(r);
            continue;
        }
        std::vector<double> values;
        for (const auto& s : samples)
        {
            double v = 0;
            for (std::size_t i = 0; i < theta.size(); ++i)
                v += theta[i] * static_cast<double>(s.W[i]);
            values.push_back(v / std::sqrt(static_cast<double>(std::max<std::uint64_t>(s.t, 1))));
        }
        r.distance = ks_normal(std::move(values), r.variance);
        out.push_back(r);
    }
    return out;
}

} // namespace treewind
