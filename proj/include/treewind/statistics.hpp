/**
 * Winding statistics over a homology basis and their exact asymptotic
 * covariance.
 *
 * A basis is a list of tracked directed 1-cells (from, to) of a chain, each
 * carrying integer coefficients on the basis elements it lies over. For the
 * exclusion process the tracked cells are the non-collapsible 1-cells and the
 * coefficients come from the lies-on-top projection; for a plain random walk
 * they are the spanning-tree complement edges.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "combinatorics.hpp"
#include "dconfig.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "markov.hpp"

namespace treewind {

struct TrackedCell {
    std::size_t from = 0;
    std::size_t to = 0;
    std::vector<std::pair<std::size_t, int>> over; // (basis index, coefficient)
    std::string label;
};

struct WindingBasis {
    std::vector<std::string> labels;              // one per basis element
    std::vector<std::size_t> anchors;             // essential vertex (DFS label) or complement-edge index
    std::vector<TrackedCell> cells;
    std::vector<std::vector<std::size_t>> lifts;  // basis index -> tracked cells over it
    std::vector<int> signs;                       // planar signs, PW = sum signs_i W_i
    Matrix statistics;                            // states x g, column i is f~_i
    std::vector<double> cell_mass;                // pi_E(from, to) per tracked cell

    std::size_t rank() const { return labels.size(); }

    /// Variance term of basis element i: sum over lifts of coefficient^2 pi_E.
    double lift_mass(std::size_t i) const
    {
        double s = 0;
        for (std::size_t c : lifts.at(i))
            for (const auto& [b, k] : cells[c].over)
                if (b == i)
                    s += static_cast<double>(k * k) * cell_mass[c];
        return s;
    }

    /// Number of tracked cells lying over basis element i.
    std::size_t lift_count(std::size_t i) const { return lifts.at(i).size(); }
};

namespace detail {

inline void finalize(WindingBasis& basis, const FiniteChain& chain)
{
    const Matrix& P = chain.transition();
    const Vector& pi = chain.stationary();
    const std::size_t g = basis.labels.size();
    if (basis.signs.empty())
        basis.signs.assign(g, 1);
    if (basis.signs.size() != g)
        throw Error("dimension_mismatch", "expected " + std::to_string(g) + " signs, got " +
                                              std::to_string(basis.signs.size()));
    for (int s : basis.signs)
        if (s != 1 && s != -1)
            throw Error("invalid_argument", "signs must be +1 or -1");

    basis.lifts.assign(g, {});
    basis.cell_mass.clear();
    basis.statistics = Matrix::Zero(static_cast<Eigen::Index>(chain.size()), static_cast<Eigen::Index>(g));
    for (std::size_t c = 0; c < basis.cells.size(); ++c)
    {
        const TrackedCell& cell = basis.cells[c];
        const double forward = P(cell.from, cell.to);
        const double backward = P(cell.to, cell.from);
        if (forward == 0.0)
            throw Error("internal", "tracked cell " + cell.label + " is not a move of the chain");
        basis.cell_mass.push_back(pi(cell.from) * forward);
        for (const auto& [b, k] : cell.over)
        {
            basis.lifts[b].push_back(c);
            basis.statistics(cell.from, b) += k * forward;
            basis.statistics(cell.to, b) -= k * backward;
        }
    }
}

} // namespace detail

/**
 * Winding statistics of the exclusion chain: tracked cells are the
 * non-collapsible 1-cells, projected onto the critical basis.
 */
inline WindingBasis build_basis_statistics(const Census& census, const FiniteChain& chain, std::vector<int> signs = {})
{
    if (chain.size() != census.zero_cell_count())
        throw Error("dimension_mismatch", "chain does not match the configuration space");
    WindingBasis basis;
    for (std::size_t cell : census.critical())
    {
        basis.labels.push_back(census.describe(cell));
        basis.anchors.push_back(census.cells()[cell].edge.tau);
    }
    const auto nc = census.noncollapsible();
    for (std::size_t k = 0; k < nc.size(); ++k)
    {
        if (census.lies_over(k).empty())
            continue;
        TrackedCell t{census.low_state(nc[k]), census.high_state(nc[k]), {}, census.describe(nc[k])};
        for (std::size_t b : census.lies_over(k))
            t.over.emplace_back(b, 1);
        basis.cells.push_back(std::move(t));
    }
    basis.signs = std::move(signs);
    detail::finalize(basis, chain);
    return basis;
}

/// Accumulated-homology statistics of a walk on a graph, one per complement edge.
inline WindingBasis complement_basis(const FiniteChain& chain,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& complement)
{
    WindingBasis basis;
    for (std::size_t i = 0; i < complement.size(); ++i)
    {
        const auto [x, y] = complement[i];
        const std::string label = "(" + std::to_string(x) + "," + std::to_string(y) + ")";
        basis.labels.push_back(label);
        basis.anchors.push_back(i);
        basis.cells.push_back({x, y, {{i, 1}}, label});
    }
    detail::finalize(basis, chain);
    return basis;
}

/// The same basis with element i reversed wherever flips[i] == -1.
inline WindingBasis reoriented(WindingBasis basis, const std::vector<int>& flips, const FiniteChain& chain)
{
    if (flips.size() != basis.rank())
        throw Error("dimension_mismatch", "orientation vector has the wrong length");
    for (auto& cell : basis.cells)
        for (auto& [b, k] : cell.over)
            k *= flips[b];
    detail::finalize(basis, chain);
    return basis;
}

/// E_pi(f~_i) for every i.
inline std::vector<double> statistic_means(const WindingBasis& basis, const FiniteChain& chain)
{
    std::vector<double> out;
    for (std::size_t i = 0; i < basis.rank(); ++i)
        out.push_back(chain.stationary().dot(basis.statistics.col(static_cast<Eigen::Index>(i))));
    return out;
}

/// E_{pi_E} of the signed indicators: forward mass minus backward mass.
inline std::vector<double> indicator_means(const WindingBasis& basis, const FiniteChain& chain)
{
    const Matrix& P = chain.transition();
    const Vector& pi = chain.stationary();
    std::vector<double> out(basis.rank(), 0.0);
    for (const auto& cell : basis.cells)
        for (const auto& [b, k] : cell.over)
            out[b] += k * (pi(cell.from) * P(cell.from, cell.to) - pi(cell.to) * P(cell.to, cell.from));
    return out;
}

struct Interval {
    double lo = 0;
    double hi = 0;
    std::string rule;

    bool contains(double v, double tol = 1e-12) const { return v >= lo - tol && v <= hi + tol; }
};

/**
 * Exact covariance of the winding statistics:
 * sigma^2(a) = 2 sum_c w_c^2 pi_E(c) - 2 <G F_a, F_a>_pi with w = per-cell
 * weight of a and F_a = sum_i a_i f~_i.
 */
class WindingCovariance {
public:
    WindingCovariance(const FiniteChain& chain, const WindingBasis& basis)
        : basis_(basis), pi_(chain.stationary()), spectrum_(spectrum(chain))
    {
        if (basis.rank() == 0)
            return;
        if (spectrum_.degenerate)
            throw Error("no_spectral_gap", "no spectral gap: covariance is undefined");
        green_.emplace(chain);
        GF_ = green_->matrix() * basis.statistics;
    }

    std::size_t rank() const { return basis_.rank(); }
    const Spectrum& chain_spectrum() const { return spectrum_; }
    const GreenFunction& green_function() const { return *green_; }

    double inner(const Vector& u, const Vector& v) const { return (pi_.array() * u.array() * v.array()).sum(); }

    Vector combined(std::span<const double> alpha) const
    {
        check(alpha);
        Vector a = Eigen::Map<const Vector>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
        return basis_.statistics * a;
    }

    /// 2 sum_c w_c^2 pi_E(c): the quadratic form with G replaced by 0.
    double variance_term(std::span<const double> alpha) const
    {
        check(alpha);
        double s = 0;
        for (std::size_t c = 0; c < basis_.cells.size(); ++c)
        {
            double w = 0;
            for (const auto& [b, k] : basis_.cells[c].over)
                w += k * alpha[b];
            s += w * w * basis_.cell_mass[c];
        }
        return 2.0 * s;
    }

    double quadform_raw(std::span<const double> alpha) const
    {
        if (rank() == 0)
            return 0.0;
        const Vector F = combined(alpha);
        Vector a = Eigen::Map<const Vector>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
        const Vector GF = GF_ * a;
        return variance_term(alpha) - 2.0 * inner(GF, F);
    }

    /// sigma^2(alpha), with values in [-1e-10, 0) clamped to 0.
    double quadform(std::span<const double> alpha) const
    {
        const double v = quadform_raw(alpha);
        return v < 0 && v >= -kResidualTol ? 0.0 : v;
    }

    /// Sigma by polarization of the quadratic form.
    Matrix covariance() const
    {
        const std::size_t g = rank();
        Matrix S = Matrix::Zero(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(g));
        std::vector<double> diag(g);
        for (std::size_t i = 0; i < g; ++i)
            diag[i] = quadform_raw(unit(i, 0, 0));
        for (std::size_t i = 0; i < g; ++i)
        {
            S(i, i) = diag[i] < 0 && diag[i] >= -kResidualTol ? 0.0 : diag[i];
            for (std::size_t j = i + 1; j < g; ++j)
            {
                const double v = 0.5 * (quadform_raw(unit(i, j, 1)) - diag[i] - diag[j]);
                S(i, j) = v;
                S(j, i) = v;
            }
        }
        return S;
    }

    /// The stated off-diagonal expression 2 <G f~_i, f~_j>_pi (diagonal left 0).
    Matrix stated_offdiagonal() const
    {
        const std::size_t g = rank();
        Matrix S = Matrix::Zero(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(g));
        for (std::size_t i = 0; i < g; ++i)
            for (std::size_t j = 0; j < g; ++j)
                if (i != j)
                    S(i, j) = 2.0 * inner(GF_.col(i), basis_.statistics.col(j));
        return S;
    }

    double norm2(std::size_t i) const
    {
        const auto f = basis_.statistics.col(static_cast<Eigen::Index>(i));
        return inner(f, f);
    }

    double cross(std::size_t i, std::size_t j) const
    {
        return inner(basis_.statistics.col(static_cast<Eigen::Index>(i)),
                     basis_.statistics.col(static_cast<Eigen::Index>(j)));
    }

    /// Spectral sandwich for sigma^2(alpha).
    Interval bound(std::span<const double> alpha) const
    {
        const Vector F = combined(alpha);
        const double v = variance_term(alpha);
        const double n2 = inner(F, F);
        return {v - 2.0 * n2 / spectrum_.gap, v - 2.0 * n2 / (1.0 - spectrum_.smallest), "spectral_sandwich"};
    }

    /// Per-entry intervals: sandwich on the diagonal, polarized bounds off it.
    std::vector<std::vector<Interval>> bounds() const
    {
        const std::size_t g = rank();
        std::vector<std::vector<Interval>> out(g, std::vector<Interval>(g));
        const double inv_gap = 1.0 / spectrum_.gap;
        const double inv_top = 1.0 / (1.0 - spectrum_.smallest);
        for (std::size_t i = 0; i < g; ++i)
        {
            out[i][i] = bound(unit(i, 0, 0));
            for (std::size_t j = i + 1; j < g; ++j)
            {
                const double base = cross_variance(i, j);
                const double a = norm2(i) + norm2(j);
                const double s = a + 2.0 * cross(i, j);
                Interval iv{base + a * inv_top - s * inv_gap, base + a * inv_gap - s * inv_top, "offdiagonal"};
                if (std::abs(cross(i, j)) <= 1e-15)
                {
                    const double r = a * (inv_gap - inv_top);
                    iv.lo = std::max(iv.lo, base - r);
                    iv.hi = std::min(iv.hi, base + r);
                    iv.rule = "nonadjacent";
                }
                out[i][j] = iv;
                out[j][i] = iv;
            }
        }
        return out;
    }

    /// 2 sum_c k_ci k_cj pi_E(c): variance cross term, zero when lifts are disjoint.
    double cross_variance(std::size_t i, std::size_t j) const
    {
        double s = 0;
        for (std::size_t c = 0; c < basis_.cells.size(); ++c)
        {
            int ki = 0, kj = 0;
            for (const auto& [b, k] : basis_.cells[c].over)
            {
                if (b == i)
                    ki += k;
                if (b == j)
                    kj += k;
            }
            s += ki * kj * basis_.cell_mass[c];
        }
        return 2.0 * s;
    }

private:
    void check(std::span<const double> alpha) const
    {
        if (alpha.size() != rank())
            throw Error("dimension_mismatch", "alpha has length " + std::to_string(alpha.size()) + ", expected " +
                                                  std::to_string(rank()));
    }

    std::vector<double> unit(std::size_t i, std::size_t j, int both) const
    {
        std::vector<double> a(rank(), 0.0);
        a[i] = 1.0;
        if (both)
            a[j] = 1.0;
        return a;
    }

    WindingBasis basis_;
    Vector pi_;
    Spectrum spectrum_;
    std::optional<GreenFunction> green_;
    Matrix GF_;
};

inline Matrix exact_covariance(const FiniteChain& chain, const WindingBasis& basis)
{
    return WindingCovariance(chain, basis).covariance();
}

inline double sigma_quadform(const FiniteChain& chain, const WindingBasis& basis, std::span<const double> alpha)
{
    return WindingCovariance(chain, basis).quadform(alpha);
}

/// Smallest eigenvalue of a symmetric matrix (0 for an empty one).
inline double min_eigenvalue(const Matrix& S)
{
    if (S.rows() == 0)
        return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

} // namespace treewind
