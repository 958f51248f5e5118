#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace bddmma::kernels {

/// Pair of min-marginals (m^0, m^1). +inf marks an infeasible fixing.
struct MinMarginalPair {
    double m0;
    double m1;
};

// Layer kernels operate on one BDD partition of `count` contiguous nodes. `lo`/`hi`
// hold the zero/one successor ids of those nodes and index into `dist_to_top`, which
// covers the whole BDD including the two terminal slots.

/// out[v] = min(dist_to_top[lo[v]], dist_to_top[hi[v]] + cost)
using RelaxBackwardFn = void (*)(const std::int32_t* lo, const std::int32_t* hi, std::size_t count, double cost,
                                 const double* dist_to_top, double* out);

/// m0 = min_v from_root[v] + dist_to_top[lo[v]]
/// m1 = min_v (from_root[v] + cost) + dist_to_top[hi[v]]
using LayerMinMarginalsFn = MinMarginalPair (*)(const double* from_root, const std::int32_t* lo, const std::int32_t* hi,
                                                std::size_t count, double cost, const double* dist_to_top);

/// dist_from_root[lo[v]] = min(., from_root[v]); dist_from_root[hi[v]] = min(., from_root[v] + cost)
using RelaxForwardFn = void (*)(const double* from_root, const std::int32_t* lo, const std::int32_t* hi, std::size_t count,
                                double cost, double* dist_from_root);

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

struct KernelTable {
    Isa isa;
    RelaxBackwardFn relax_backward;
    LayerMinMarginalsFn layer_min_marginals;
    RelaxForwardFn relax_forward;
};

const KernelTable& scalar_table();

/// nullptr when the variant was not compiled in or the CPU lacks the instructions.
const KernelTable* avx2_table();

/// Best table supported by the running CPU, unless overridden through
/// select() or the BDDMMA_KERNELS environment variable ("scalar" / "avx2").
const KernelTable& active();

/// Returns false (and leaves the selection unchanged) if `isa` is unavailable.
bool select(Isa isa);

} // namespace bddmma::kernels
