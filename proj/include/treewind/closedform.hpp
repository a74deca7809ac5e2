/**
 * Closed forms for the two-particle exclusion process on star graphs and for
 * the lazy walk on complete graphs, plus the two determinant identities used
 * to derive the star spectrum.
 *
 * Star conventions: the star with l leaves has ids "0" (root leaf), "1"
 * (center) and "2".."l". A configuration is written by its occupied leaves;
 * a single leaf k means {center, k}. Leaf 1 is the root (DFS label 0) and
 * leaf k >= 2 has DFS label k.
 */
#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "combinatorics.hpp"
#include "dconfig.hpp"
#include "error.hpp"
#include "markov.hpp"

namespace treewind {

using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return static_cast<double>(r); }

namespace detail {

inline void require_star(std::size_t l)
{
    if (l < 3)
        throw Error("invalid_argument", "l ≥ 3 required");
}

inline Rational q(long long num, long long den = 1) { return Rational(num) / Rational(den); }

} // namespace detail

/// DFS label of leaf k on the star (leaf 1 is the root).
inline Vertex star_leaf(std::size_t k) { return k == 1 ? 0 : k; }

/// Configuration named by occupied leaves: {k} means center + leaf k.
inline Config star_config(std::vector<std::size_t> leaves)
{
    Config c;
    if (leaves.size() == 1)
        c = {1, star_leaf(leaves[0])};
    else
        c = {star_leaf(leaves[0]), star_leaf(leaves[1])};
    std::sort(c.begin(), c.end());
    return c;
}

struct Eigenvalue {
    Rational value;
    std::size_t multiplicity;
};

inline std::vector<Eigenvalue> star_spectrum(std::size_t l)
{
    detail::require_star(l);
    const long long L = static_cast<long long>(l);
    const std::size_t pairs = binomial(l, 2);
    return {{detail::q(1), 1},
            {1 - detail::q(1, 2 * L), l - 1},
            {1 - detail::q(1, L), pairs - l},
            {detail::q(1, 2), l - 1},
            {detail::q(1, 2) - detail::q(1, 2 * L), 1}};
}

/// det of the n x n matrix with c1 on the diagonal and c2 elsewhere.
template <typename T>
T two_constant_det(const T& c1, const T& c2, std::size_t n)
{
    if (n == 0)
        return T(1);
    T d = c2 * T(static_cast<long long>(n) - 1) + c1;
    for (std::size_t k = 1; k < n; ++k)
        d *= c1 - c2;
    return d;
}

/// det [[A, B], [C, D]] = det(A - B D^{-1} C) det(D).
inline double block_det(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D)
{
    if (A.rows() != A.cols() || D.rows() != D.cols() || B.rows() != A.rows() || B.cols() != D.rows() ||
        C.rows() != D.rows() || C.cols() != A.rows())
        throw Error("dimension_mismatch", "block shapes do not fit");
    Eigen::FullPivLU<Matrix> lu(D);
    if (!lu.isInvertible())
        throw Error("singular", "D block is singular");
    const Matrix S = A - B * lu.solve(C);
    return (S.rows() ? S.determinant() : 1.0) * lu.determinant();
}

/// det(P - lambda I) for the star exclusion chain, from the closed form of the proof.
inline Rational star_charpoly(std::size_t l, const Rational& lambda)
{
    detail::require_star(l);
    const long long L = static_cast<long long>(l);
    const Rational a = detail::q(L - 1, L) - lambda;
    const Rational b = detail::q(L + 1, 2 * L) - lambda;
    const Rational core = Rational(4 * L * L) * a * b;
    Rational out = 1;
    for (std::size_t k = 0; k + 1 < l; ++k)
        out *= core + Rational(2 - L);
    out *= core + Rational(2 - 2 * L);
    for (std::size_t k = 0; k + l < binomial(l, 2); ++k)
        out *= a;
    for (std::size_t k = 0; k < l; ++k)
        out /= Rational(4 * L * L);
    return out;
}

/**
 * det(P - lambda I) for the star chain by the block route: Schur complement
 * on whichever diagonal block is invertible, the leaf-pair block first.
 */
inline double star_charpoly_blocks(std::size_t l, double lambda)
{
    detail::require_star(l);
    const Eigen::Index L = static_cast<Eigen::Index>(l);
    const Eigen::Index m = static_cast<Eigen::Index>(binomial(l, 2));
    const double dl = static_cast<double>(l);
    Matrix Ablk = ((dl + 1) / (2 * dl) - lambda) * Matrix::Identity(L, L);
    Matrix Dblk = ((dl - 1) / dl - lambda) * Matrix::Identity(m, m);
    Matrix B = Matrix::Zero(L, m);
    Eigen::Index col = 0;
    for (Eigen::Index j = 0; j < L; ++j)
        for (Eigen::Index k = j + 1; k < L; ++k, ++col)
        {
            B(j, col) = 1.0 / (2 * dl);
            B(k, col) = 1.0 / (2 * dl);
        }
    const Matrix C = B.transpose();
    try
    {
        return block_det(Ablk, B, C, Dblk);
    }
    catch (const Error&)
    {
        return block_det(Dblk, C, B, Ablk);
    }
}

struct StarEntry {
    std::string name;
    Config x;
    Config y;
    Rational value;
    bool applicable = true;
};

/// The seven hitting times Q(x, y).
inline std::vector<StarEntry> star_hitting(std::size_t l)
{
    detail::require_star(l);
    const long long L = static_cast<long long>(l);
    using detail::q;
    std::vector<StarEntry> out{
        {"Q({1,2},1)", star_config({1, 2}), star_config({1}), q(L * L + 2 * L)},
        {"Q({2,3},1)", star_config({2, 3}), star_config({1}), q(2 * L * L + 3 * L)},
        {"Q(2,1)", star_config({2}), star_config({1}), q(2 * L * L + 2 * L)},
        {"Q(1,{1,2})", star_config({1}), star_config({1, 2}), q(L * L * L + L * L - 2 * L, 2)},
        {"Q(3,{1,2})", star_config({3}), star_config({1, 2}), q(L * L * L + 3 * L * L, 2)},
        {"Q({1,3},{1,2})", star_config({1, 3}), star_config({1, 2}), q(L * L * L + 2 * L * L + L, 2)},
    };
    StarEntry last{"Q({3,4},{1,2})", {}, star_config({1, 2}), q(L * L * L + 3 * L * L + 2 * L, 2), l >= 4};
    if (last.applicable)
        last.x = star_config({3, 4});
    out.push_back(last);
    return out;
}

inline Rational star_T1(std::size_t l)
{
    const long long L = static_cast<long long>(l);
    return detail::q(2 * (L - 1) * (2 * L + 1) * (L + 2), L * (L + 1) * (L + 1));
}

inline Rational star_T2(std::size_t l)
{
    const long long L = static_cast<long long>(l);
    return detail::q(L * L * L * L + 4 * L * L * L - L * L - 12 * L + 12, L * (L + 1) * (L + 1));
}

/// The Green's-function table as printed: T1, T2 and their offsets.
inline std::vector<StarEntry> star_green(std::size_t l)
{
    detail::require_star(l);
    const long long L = static_cast<long long>(l);
    const Rational T1 = star_T1(l), T2 = star_T2(l);
    const Rational C = Rational(static_cast<long long>(binomial(l + 1, 2)));
    return {
        {"G(1,1)", star_config({1}), star_config({1}), T1},
        {"G({1,2},{1,2})", star_config({1, 2}), star_config({1, 2}), T2},
        {"G({1,2},1)", star_config({1, 2}), star_config({1}), T1 - Rational(L * L + 2 * L) / C},
        {"G({2,3},1)", star_config({2, 3}), star_config({1}), T1 - Rational(2 * L * L + 3 * L) / C},
        {"G(2,1)", star_config({2}), star_config({1}), T1 - Rational(2 * L * L + 2 * L) / C},
        {"G(1,{1,2})", star_config({1}), star_config({1, 2}), T2 - Rational(L * L * L + L * L - 2 * L) / (2 * C)},
        {"G(3,{1,2})", star_config({3}), star_config({1, 2}), T2 - Rational(L * L * L + 3 * L * L) / (2 * C)},
        {"G({1,3},{1,2})", star_config({1, 3}), star_config({1, 2}),
         T2 - Rational(L * L * L + 2 * L * L + L) / (2 * C)},
        {"G({3,4},{1,2})", l >= 4 ? star_config({3, 4}) : Config{}, star_config({1, 2}),
         T2 - Rational(L * L * L + 3 * L * L + 2 * L) / (2 * C), l >= 4},
    };
}

/**
 * The same nine entries rebuilt from the hitting-time table with
 * G(y,y) = pi^2 sum_z Q(z,y) and G(x,y) = G(y,y) - pi Q(x,y), summing over
 * the symmetric-group orbits of each target.
 */
inline std::vector<StarEntry> star_green_from_hitting(std::size_t l)
{
    detail::require_star(l);
    const long long L = static_cast<long long>(l);
    const Rational pi = Rational(1) / Rational(static_cast<long long>(binomial(l + 1, 2)));
    const auto Q = star_hitting(l);
    // Orbits relative to target 1: {1,2}-type (l-1), {2,3}-type C(l-1,2), 2-type (l-1).
    const Rational sum1 = Rational(L - 1) * Q[0].value + Rational(static_cast<long long>(binomial(l - 1, 2))) * Q[1].value +
                          Rational(L - 1) * Q[2].value;
    // Orbits relative to target {1,2}: 1-type 2, 3-type (l-2), {1,3}-type 2(l-2), {3,4}-type C(l-2,2).
    Rational sum12 = Rational(2) * Q[3].value + Rational(L - 2) * Q[4].value + Rational(2 * (L - 2)) * Q[5].value;
    if (l >= 4)
        sum12 += Rational(static_cast<long long>(binomial(l - 2, 2))) * Q[6].value;
    const Rational G11 = pi * pi * sum1;
    const Rational G22 = pi * pi * sum12;
    auto out = star_green(l);
    out[0].value = G11;
    out[1].value = G22;
    out[2].value = G11 - pi * Q[0].value;
    out[3].value = G11 - pi * Q[1].value;
    out[4].value = G11 - pi * Q[2].value;
    out[5].value = G22 - pi * Q[3].value;
    out[6].value = G22 - pi * Q[4].value;
    out[7].value = G22 - pi * Q[5].value;
    out[8].value = G22 - pi * Q[6].value;
    return out;
}

/// Printed bounds on the star winding covariance.
struct StarBounds {
    Rational diagonal_hi;
    Rational offdiagonal_lo;
    Rational offdiagonal_hi;
};

inline StarBounds star_bounds(std::size_t l)
{
    detail::require_star(l);
    const long long L = static_cast<long long>(l);
    const Rational den = Rational(L * (L + 1)) * Rational(static_cast<long long>(binomial(l + 1, 2)));
    return {Rational(L - 1) / den, -Rational(3 * L + 1) / den, Rational(2 * L - 1) / den};
}

enum class EdgePair { HeadTail, SameEnd, Disjoint };

inline const char* to_string(EdgePair p)
{
    switch (p)
    {
    case EdgePair::HeadTail: return "head-tail";
    case EdgePair::SameEnd: return "same-end";
    case EdgePair::Disjoint: return "disjoint";
    }
    return "?";
}

inline EdgePair classify_pair(std::pair<std::size_t, std::size_t> ei, std::pair<std::size_t, std::size_t> ej)
{
    if (ei.second == ej.first || ej.second == ei.first)
        return EdgePair::HeadTail;
    if (ei.first == ej.first || ei.second == ej.second)
        return EdgePair::SameEnd;
    return EdgePair::Disjoint;
}

/// Printed covariance rules for the lazy walk on K_n.
struct CompleteRules {
    std::size_t n = 0;
    Rational pi_E;
    Rational diagonal;
    Rational head_tail;
    Rational same_end;
    Rational disjoint;

    Rational value(EdgePair p) const
    {
        switch (p)
        {
        case EdgePair::HeadTail: return head_tail;
        case EdgePair::SameEnd: return same_end;
        case EdgePair::Disjoint: return disjoint;
        }
        return 0;
    }
};

inline CompleteRules complete_cov(std::size_t n)
{
    if (n < 3)
        throw Error("invalid_argument", "n ≥ 3 required");
    const Rational C = Rational(static_cast<long long>(binomial(n, 2)));
    const Rational N = Rational(static_cast<long long>(n));
    const Rational p = Rational(1) / (2 * N * C);
    return {n, p, (N - 2) / (N * N * C), p * p, -p * p, 0};
}

} // namespace treewind
