#pragma once

#include "aew/subset_linalg.hpp"

#include <cstddef>
#include <vector>

namespace aew {

/// Number of subsets of [p] with min_size <= |J| <= max_size, saturated at
/// cap + 1 so callers can compare against cap without overflow.
inline std::size_t count_subsets(std::size_t p, std::size_t min_size, std::size_t max_size,
                                 std::size_t cap) {
    std::size_t total = 0;
    double binom = 1.0;  // C(p, s), exact below 2^53
    for (std::size_t s = 0; s <= max_size && s <= p; ++s) {
        if (s > 0) binom = binom * static_cast<double>(p - s + 1) / static_cast<double>(s);
        if (s < min_size) continue;
        if (binom > static_cast<double>(cap)) return cap + 1;
        total += static_cast<std::size_t>(binom + 0.5);
        if (total > cap) return cap + 1;
    }
    return total;
}

/// Visits every J with |J| <= max_size in lexicographic (depth-first) order,
/// calling visit(J) with the sorted index vector. If visit returns false the
/// supersets of J that extend it are skipped.
template <class Visit>
void for_each_subset(std::size_t p, std::size_t max_size, Visit&& visit) {
    Support J;
    auto recurse = [&](auto&& self, std::size_t start) -> void {
        if (!visit(static_cast<const Support&>(J))) return;
        if (J.size() >= max_size) return;
        for (std::size_t k = start; k < p; ++k) {
            J.push_back(k);
            self(self, k + 1);
            J.pop_back();
        }
    };
    recurse(recurse, 0);
}

/// Like for_each_subset, but hands the visitor a SubsetState built by
/// extending the parent's factor by one column.
template <class Visit>
void for_each_subset_state(const Dataset& data, std::size_t max_size, Visit&& visit) {
    const std::size_t p = data.p();
    auto recurse = [&](auto&& self, const SubsetState& state, std::size_t start) -> void {
        visit(state);
        if (state.size() >= max_size) return;
        for (std::size_t k = start; k < p; ++k) {
            SubsetState child = state;
            child.add(data, k);
            self(self, child, k + 1);
        }
    };
    recurse(recurse, SubsetState(data), 0);
}

}  // namespace aew
