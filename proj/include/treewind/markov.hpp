/**
 * Finite Markov chains on dense transition matrices.
 *
 * Stationary distribution, reversibility/laziness, spectrum, the discrete
 * Green's function (the inverse of I - P on pi-mean-zero statistics),
 * expected hitting times, and the edge walk Y_t = (X_t, X_{t+1}).
 *
 * Tolerances: 1e-12 for structural checks, 1e-10 for linear-algebra
 * residuals. State spaces here are at most a few thousand states.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "error.hpp"

namespace treewind {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kStructuralTol = 1e-12;
inline constexpr double kResidualTol = 1e-10;

namespace detail {

/// Returns a pair (x, y) such that y is not reachable from x, if any.
inline std::optional<std::pair<std::size_t, std::size_t>> non_communicating_pair(const Matrix& P)
{
    const std::size_t n = static_cast<std::size_t>(P.rows());
    auto reach = [&](bool forward) {
        std::vector<char> seen(n, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        while (!stack.empty())
        {
            const std::size_t s = stack.back();
            stack.pop_back();
            for (std::size_t t = 0; t < n; ++t)
            {
                const double w = forward ? P(s, t) : P(t, s);
                if (w > 0 && !seen[t])
                {
                    seen[t] = 1;
                    stack.push_back(t);
                }
            }
        }
        return seen;
    };
    const auto fwd = reach(true);
    for (std::size_t t = 0; t < n; ++t)
        if (!fwd[t])
            return std::make_pair(std::size_t{0}, t);
    const auto bwd = reach(false);
    for (std::size_t t = 0; t < n; ++t)
        if (!bwd[t])
            return std::make_pair(t, std::size_t{0});
    return std::nullopt;
}

} // namespace detail

/**
 * Stationary distribution of an irreducible stochastic matrix: solves
 * pi (I - P) = 0 with sum(pi) = 1, followed by one step of iterative
 * refinement.
 */
inline Vector stationary(const Matrix& P)
{
    const Eigen::Index n = P.rows();
    if (auto bad = detail::non_communicating_pair(P))
        throw Error("reducible", "chain is reducible: state " + std::to_string(bad->second) +
                                     " is not reachable from state " + std::to_string(bad->first));
    Matrix A = (Matrix::Identity(n, n) - P).transpose();
    A.row(n - 1).setOnes();
    Vector b = Vector::Zero(n);
    b(n - 1) = 1.0;
    Eigen::PartialPivLU<Matrix> lu(A);
    Vector pi = lu.solve(b);
    pi += lu.solve(b - A * pi);
    return pi;
}

class FiniteChain {
public:
    explicit FiniteChain(Matrix P, std::vector<std::string> names = {})
        : P_(std::move(P)), names_(std::move(names))
    {
        if (P_.rows() != P_.cols() || P_.rows() == 0)
            throw Error("invalid_chain", "transition matrix must be square and non-empty");
        if (!names_.empty() && names_.size() != size())
            throw Error("invalid_chain", "state names do not match the matrix size");
        for (Eigen::Index i = 0; i < P_.rows(); ++i)
        {
            if (P_.row(i).minCoeff() < 0)
                throw Error("invalid_chain", "negative transition probability in row " + std::to_string(i));
            if (std::abs(P_.row(i).sum() - 1.0) > kStructuralTol)
                throw Error("invalid_chain", "row " + std::to_string(i) + " does not sum to 1");
        }
        // Reducible chains are kept only when pi is still canonical
        // (doubly stochastic, e.g. the identity); spectrum() then flags them.
        irreducible_ = !detail::non_communicating_pair(P_).has_value();
        if (irreducible_)
            pi_ = treewind::stationary(P_);
        else if ((P_.colwise().sum().array() - 1.0).abs().maxCoeff() <= kStructuralTol)
            pi_ = Vector::Constant(P_.rows(), 1.0 / static_cast<double>(P_.rows()));
        else
            treewind::stationary(P_); // throws "reducible"
    }

    bool irreducible() const { return irreducible_; }

    std::size_t size() const { return static_cast<std::size_t>(P_.rows()); }
    const Matrix& transition() const { return P_; }
    const Vector& stationary() const { return pi_; }
    const std::vector<std::string>& names() const { return names_; }
    std::string name(std::size_t s) const { return names_.empty() ? std::to_string(s) : names_.at(s); }

    double stationary_residual() const
    {
        return (pi_.transpose() * P_ - pi_.transpose()).cwiseAbs().maxCoeff();
    }

    bool reversible(double tol = kStructuralTol) const
    {
        const Matrix flow = pi_.asDiagonal() * P_;
        return (flow - flow.transpose()).cwiseAbs().maxCoeff() <= tol;
    }

    bool lazy() const { return P_.diagonal().minCoeff() >= 0.5; }

    bool uniform_stationary(double tol = kStructuralTol) const
    {
        return (pi_.array() - 1.0 / static_cast<double>(size())).abs().maxCoeff() <= tol;
    }

private:
    Matrix P_;
    Vector pi_;
    std::vector<std::string> names_;
    bool irreducible_ = true;
};

struct Spectrum {
    std::vector<double> eigenvalues; // ascending, real parts
    double gap = 0;                  // 1 - second largest
    double smallest = 0;             // gamma_min
    bool symmetric_route = true;     // false: general eigensolver on a non-reversible chain
    bool complex_parts = false;
    bool degenerate = false;         // gap below 1e-12

    /// Eigenvalues merged within tol, with multiplicities, ascending.
    std::vector<std::pair<double, std::size_t>> grouped(double tol = 1e-9) const
    {
        std::vector<std::pair<double, std::size_t>> out;
        for (double v : eigenvalues)
        {
            if (!out.empty() && std::abs(v - out.back().first) <= tol)
                ++out.back().second;
            else
                out.emplace_back(v, 1);
        }
        return out;
    }
};

namespace detail {

/// D^{1/2} P D^{-1/2}, symmetric for reversible chains.
inline Matrix symmetrized(const FiniteChain& chain)
{
    const Vector s = chain.stationary().cwiseSqrt();
    Matrix S = s.asDiagonal() * chain.transition() * s.cwiseInverse().asDiagonal();
    return 0.5 * (S + S.transpose());
}

} // namespace detail

inline Spectrum spectrum(const FiniteChain& chain)
{
    Spectrum out;
    if (chain.reversible())
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(detail::symmetrized(chain), Eigen::EigenvaluesOnly);
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
            out.eigenvalues.push_back(es.eigenvalues()(i));
    }
    else
    {
        out.symmetric_route = false;
        Eigen::EigenSolver<Matrix> es(chain.transition(), false);
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        {
            out.eigenvalues.push_back(es.eigenvalues()(i).real());
            if (std::abs(es.eigenvalues()(i).imag()) > kStructuralTol)
                out.complex_parts = true;
        }
    }
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
    const std::size_t n = out.eigenvalues.size();
    out.smallest = out.eigenvalues.front();
    out.gap = n > 1 ? 1.0 - out.eigenvalues[n - 2] : 1.0;
    out.degenerate = out.gap < kStructuralTol;
    return out;
}

/**
 * Discrete Green's function G: the unique matrix with
 * (I - P) G = G (I - P) = I - Pi, Pi = 1 pi^T the projection onto constants.
 *
 * Reversible chains use the eigendecomposition of the symmetrized matrix
 * with the unit eigenvalue deflated; otherwise, or if that residual exceeds
 * 1e-10, G = (I - P + Pi)^{-1} - Pi.
 */
class GreenFunction {
public:
    explicit GreenFunction(const FiniteChain& chain) : P_(chain.transition()), pi_(chain.stationary())
    {
        const Eigen::Index n = P_.rows();
        const Matrix Pi = Vector::Ones(n) * pi_.transpose();
        if (chain.reversible())
        {
            Eigen::SelfAdjointEigenSolver<Matrix> es(detail::symmetrized(chain));
            const Vector& lambda = es.eigenvalues();
            if (n > 1 && 1.0 - lambda(n - 2) < kStructuralTol)
                throw Error("no_spectral_gap", "no spectral gap: second eigenvalue is 1");
            Vector h(n);
            for (Eigen::Index k = 0; k < n; ++k)
                h(k) = k == n - 1 ? 0.0 : 1.0 / (1.0 - lambda(k));
            const Vector s = pi_.cwiseSqrt();
            const Matrix& U = es.eigenvectors();
            G_ = s.cwiseInverse().asDiagonal() * (U * h.asDiagonal() * U.transpose()) * s.asDiagonal();
            residual_ = compute_residual(Pi);
        }
        if (!chain.reversible() || residual_ > kResidualTol)
        {
            fallback_ = true;
            const Matrix A = Matrix::Identity(n, n) - P_ + Pi;
            Eigen::FullPivLU<Matrix> lu(A);
            if (!lu.isInvertible())
                throw Error("no_spectral_gap", "no spectral gap: I - P + Pi is singular");
            G_ = lu.inverse() - Pi;
            residual_ = compute_residual(Pi);
        }
    }

    const Matrix& matrix() const { return G_; }
    Vector apply(const Vector& f) const { return G_ * f; }
    double operator()(std::size_t x, std::size_t y) const { return G_(x, y); }
    bool used_fallback() const { return fallback_; }

    /// max(||(I-P)G - (I-Pi)||_inf, ||G(I-P) - (I-Pi)||_inf), row-sum norm.
    double residual() const { return residual_; }

private:
    double compute_residual(const Matrix& Pi) const
    {
        const Eigen::Index n = P_.rows();
        const Matrix I = Matrix::Identity(n, n);
        const Matrix target = I - Pi;
        const double left = ((I - P_) * G_ - target).cwiseAbs().rowwise().sum().maxCoeff();
        const double right = (G_ * (I - P_) - target).cwiseAbs().rowwise().sum().maxCoeff();
        return std::max(left, right);
    }

    Matrix P_;
    Vector pi_;
    Matrix G_;
    double residual_ = 0;
    bool fallback_ = false;
};

inline GreenFunction green(const FiniteChain& chain) { return GreenFunction(chain); }

/**
 * Expected hitting times Q(x, y): for each target y, Q(., y) solves
 * (I - P_hat) q = 1 where P_hat drops row and column y.
 */
inline Matrix hitting_times(const FiniteChain& chain)
{
    const Eigen::Index n = static_cast<Eigen::Index>(chain.size());
    const Matrix& P = chain.transition();
    Matrix Q = Matrix::Zero(n, n);
    if (n == 1)
        return Q;
    for (Eigen::Index y = 0; y < n; ++y)
    {
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < n; ++i)
            if (i != y)
                keep.push_back(i);
        Matrix A(n - 1, n - 1);
        for (Eigen::Index a = 0; a < n - 1; ++a)
            for (Eigen::Index b = 0; b < n - 1; ++b)
                A(a, b) = (a == b ? 1.0 : 0.0) - P(keep[a], keep[b]);
        Eigen::FullPivLU<Matrix> lu(A);
        if (!lu.isInvertible())
            throw Error("reducible", "hitting-time system is singular for target " + std::to_string(y));
        const Vector q = lu.solve(Vector::Ones(n - 1));
        for (Eigen::Index a = 0; a < n - 1; ++a)
            Q(keep[a], y) = q(a);
    }
    return Q;
}

struct HittingGreen {
    Matrix G;                 // from hitting times
    double max_discrepancy;   // max |G - linear-solve Green|
};

/**
 * Green's function from hitting times:
 * G(x,x) = pi(x)^2 sum_z Q(z,x), G(x,y) = G(y,y) - pi(x) Q(x,y).
 * Only valid for uniform pi; other chains are refused.
 */
inline HittingGreen green_via_hitting(const FiniteChain& chain, const Matrix& Q, const GreenFunction& reference)
{
    if (!chain.uniform_stationary())
        throw Error("non_uniform_stationary",
                    "hitting-time Green's formula is only validated for a uniform stationary distribution");
    const Eigen::Index n = static_cast<Eigen::Index>(chain.size());
    const Vector& pi = chain.stationary();
    HittingGreen out{Matrix(n, n), 0.0};
    for (Eigen::Index x = 0; x < n; ++x)
        out.G(x, x) = pi(x) * pi(x) * Q.col(x).sum();
    for (Eigen::Index x = 0; x < n; ++x)
        for (Eigen::Index y = 0; y < n; ++y)
            if (x != y)
                out.G(x, y) = out.G(y, y) - pi(x) * Q(x, y);
    out.max_discrepancy = (out.G - reference.matrix()).cwiseAbs().maxCoeff();
    return out;
}

inline HittingGreen green_via_hitting(const FiniteChain& chain)
{
    return green_via_hitting(chain, hitting_times(chain), GreenFunction(chain));
}

struct DirectedEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    friend bool operator==(const DirectedEdge&, const DirectedEdge&) = default;
    friend auto operator<=>(const DirectedEdge&, const DirectedEdge&) = default;
};

/**
 * Edge walk on the off-diagonal support of P. `mass` holds
 * pi_E(x,y) = pi(x) P(x,y) unnormalized; `normalized` sums to 1.
 */
struct EdgeWalk {
    std::vector<DirectedEdge> states;
    std::vector<double> mass;
    std::vector<double> normalized;
    double total_mass = 0;

    bool empty() const { return states.empty(); }

    std::size_t index_of(std::size_t x, std::size_t y) const
    {
        auto it = std::lower_bound(states.begin(), states.end(), DirectedEdge{x, y});
        if (it == states.end() || *it != DirectedEdge{x, y})
            return states.size();
        return static_cast<std::size_t>(it - states.begin());
    }
};

inline EdgeWalk edge_walk(const FiniteChain& chain)
{
    const Matrix& P = chain.transition();
    const Vector& pi = chain.stationary();
    EdgeWalk ew;
    for (std::size_t x = 0; x < chain.size(); ++x)
        for (std::size_t y = 0; y < chain.size(); ++y)
            if (x != y && P(x, y) != 0.0)
            {
                ew.states.push_back({x, y});
                ew.mass.push_back(pi(x) * P(x, y));
                ew.total_mass += ew.mass.back();
            }
    for (double m : ew.mass)
        ew.normalized.push_back(m / ew.total_mass);
    if (chain.reversible())
        for (std::size_t k = 0; k < ew.states.size(); ++k)
        {
            const std::size_t r = ew.index_of(ew.states[k].to, ew.states[k].from);
            if (r == ew.states.size() || std::abs(ew.mass[k] - ew.mass[r]) > kStructuralTol)
                throw Error("internal", "edge-walk stationary mass is not symmetric on a reversible chain");
        }
    return ew;
}

/**
 * Dense transition matrix of the edge walk on all of {(x,y) : P(x,y) != 0},
 * self-loops included: P_E((x,y),(z,w)) = P(z,w) if z == y.
 */
inline Matrix edge_walk_matrix(const FiniteChain& chain, std::vector<DirectedEdge>& states)
{
    const Matrix& P = chain.transition();
    states.clear();
    for (std::size_t x = 0; x < chain.size(); ++x)
        for (std::size_t y = 0; y < chain.size(); ++y)
            if (P(x, y) != 0.0)
                states.push_back({x, y});
    const Eigen::Index m = static_cast<Eigen::Index>(states.size());
    Matrix PE = Matrix::Zero(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b)
            if (states[b].from == states[a].to)
                PE(a, b) = P(states[b].from, states[b].to);
    return PE;
}

inline nlohmann::json to_json(const FiniteChain& chain, const Spectrum& spec)
{
    nlohmann::json P = nlohmann::json::array();
    for (Eigen::Index i = 0; i < chain.transition().rows(); ++i)
        for (Eigen::Index j = 0; j < chain.transition().cols(); ++j)
            P.push_back(chain.transition()(i, j));
    std::vector<double> pi(chain.stationary().data(), chain.stationary().data() + chain.size());
    std::vector<std::string> names;
    for (std::size_t s = 0; s < chain.size(); ++s)
        names.push_back(chain.name(s));
    return {{"schema", 1},
            {"states", names},
            {"P", P},
            {"pi", pi},
            {"eigenvalues", spec.eigenvalues},
            {"delta", spec.gap},
            {"gamma_min", spec.smallest},
            {"reversible", spec.symmetric_route},
            {"degenerate", spec.degenerate}};
}

} // namespace treewind
