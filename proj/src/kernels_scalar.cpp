#include "kernels_impl.h"

#include <algorithm>
#include <limits>

namespace bddmma::kernels::scalar {

void relax_backward(const std::int32_t* lo, const std::int32_t* hi, std::size_t count, double cost,
                    const double* dist_to_top, double* out)
{
    for (std::size_t v = 0; v < count; ++v)
        out[v] = std::min(dist_to_top[lo[v]], dist_to_top[hi[v]] + cost);
}

MinMarginalPair layer_min_marginals(const double* from_root, const std::int32_t* lo, const std::int32_t* hi,
                                    std::size_t count, double cost, const double* dist_to_top)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    MinMarginalPair mm{inf, inf};
    for (std::size_t v = 0; v < count; ++v) {
        mm.m0 = std::min(mm.m0, from_root[v] + dist_to_top[lo[v]]);
        mm.m1 = std::min(mm.m1, (from_root[v] + cost) + dist_to_top[hi[v]]);
    }
    return mm;
}

void relax_forward(const double* from_root, const std::int32_t* lo, const std::int32_t* hi, std::size_t count,
                   double cost, double* dist_from_root)
{
    for (std::size_t v = 0; v < count; ++v) {
        double& z = dist_from_root[lo[v]];
        z = std::min(z, from_root[v]);
        double& o = dist_from_root[hi[v]];
        o = std::min(o, from_root[v] + cost);
    }
}

} // namespace bddmma::kernels::scalar
