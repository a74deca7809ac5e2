/**
 * Binomial coefficients and ranking of k-subsets.
 *
 * Subsets are sorted vectors of distinct indices. The colexicographic rank
 * of {c_0 < c_1 < ... < c_{k-1}} is sum_i C(c_i, i + 1); it enumerates the
 * k-subsets of {0..m-1} as 0..C(m,k)-1.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace treewind {

inline std::size_t binomial(std::size_t m, std::size_t k)
{
    if (k > m)
        return 0;
    if (k > m - k)
        k = m - k;
    unsigned __int128 result = 1;
    for (std::size_t i = 1; i <= k; ++i)
    {
        result = result * (m - k + i) / i;
        if (result > std::numeric_limits<std::size_t>::max())
            throw Error("overflow", "binomial coefficient does not fit in 64 bits");
    }
    return static_cast<std::size_t>(result);
}

inline std::size_t colex_rank(std::span<const std::size_t> subset)
{
    std::size_t rank = 0;
    for (std::size_t i = 0; i < subset.size(); ++i)
        rank += binomial(subset[i], i + 1);
    return rank;
}

/** Inverse of colex_rank for k-subsets. */
inline std::vector<std::size_t> colex_unrank(std::size_t rank, std::size_t k)
{
    std::vector<std::size_t> subset(k);
    for (std::size_t i = k; i-- > 0;)
    {
        // largest c with C(c, i+1) <= rank
        std::size_t c = i;
        while (binomial(c + 1, i + 1) <= rank)
            ++c;
        subset[i] = c;
        rank -= binomial(c, i + 1);
    }
    return subset;
}

/**
 * Advance `subset` (sorted, values < m) to the next k-subset in
 * lexicographic order. Returns false after the last one.
 */
inline bool next_combination(std::vector<std::size_t>& subset, std::size_t m)
{
    const std::size_t k = subset.size();
    for (std::size_t i = k; i-- > 0;)
    {
        if (subset[i] < m - k + i)
        {
            ++subset[i];
            for (std::size_t j = i + 1; j < k; ++j)
                subset[j] = subset[j - 1] + 1;
            return true;
        }
    }
    return false;
}

inline std::vector<std::size_t> first_combination(std::size_t k)
{
    std::vector<std::size_t> subset(k);
    for (std::size_t i = 0; i < k; ++i)
        subset[i] = i;
    return subset;
}

/** FNV-1a, used for stable content fingerprints in output metadata. */
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 14695981039346656037ull)
{
    for (unsigned char c : bytes)
    {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace treewind
