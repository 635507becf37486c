#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

namespace umc::detail {

// Rescales a nonnegative vector so that its sequential sum is bit-exactly
// 1.0: divide through, then push the residual onto the largest entry until
// the fixed point. Entries stay nonnegative (the residual is O(eps)).
inline void renormalize_exact(std::vector<double>& p) {
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& v : p) v /= s;
    for (int pass = 0; pass < 8; ++pass) {
        const double s2 = std::accumulate(p.begin(), p.end(), 0.0);
        if (s2 == 1.0) return;
        *std::max_element(p.begin(), p.end()) += 1.0 - s2;
    }
}

}  // namespace umc::detail
