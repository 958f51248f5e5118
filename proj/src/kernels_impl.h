#pragma once

#include "bddmma/kernels.h"

namespace bddmma::kernels {

namespace scalar {
void relax_backward(const std::int32_t* lo, const std::int32_t* hi, std::size_t count, double cost,
                    const double* dist_to_top, double* out);
MinMarginalPair layer_min_marginals(const double* from_root, const std::int32_t* lo, const std::int32_t* hi,
                                    std::size_t count, double cost, const double* dist_to_top);
void relax_forward(const double* from_root, const std::int32_t* lo, const std::int32_t* hi, std::size_t count,
                   double cost, double* dist_from_root);
} // namespace scalar

namespace avx2 {
bool compiled();
void relax_backward(const std::int32_t* lo, const std::int32_t* hi, std::size_t count, double cost,
                    const double* dist_to_top, double* out);
MinMarginalPair layer_min_marginals(const double* from_root, const std::int32_t* lo, const std::int32_t* hi,
                                    std::size_t count, double cost, const double* dist_to_top);
} // namespace avx2

} // namespace bddmma::kernels
