// Compiled with -mavx2; only reached after a runtime CPU check.
#include "kernels_impl.h"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace bddmma::kernels::avx2 {

#if defined(__AVX2__)

bool compiled() { return true; }

void relax_backward(const std::int32_t* lo, const std::int32_t* hi, std::size_t count, double cost,
                    const double* dist_to_top, double* out)
{
    const __m256d c = _mm256_set1_pd(cost);
    std::size_t v = 0;
    for (; v + 4 <= count; v += 4) {
        const __m128i lo_idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(lo + v));
        const __m128i hi_idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(hi + v));
        const __m256d zero_branch = _mm256_i32gather_pd(dist_to_top, lo_idx, 8);
        const __m256d one_branch = _mm256_add_pd(_mm256_i32gather_pd(dist_to_top, hi_idx, 8), c);
        // operand order matches std::min(a, b): returns a unless b < a
        _mm256_storeu_pd(out + v, _mm256_min_pd(one_branch, zero_branch));
    }
    if (v < count)
        scalar::relax_backward(lo + v, hi + v, count - v, cost, dist_to_top, out + v);
}

MinMarginalPair layer_min_marginals(const double* from_root, const std::int32_t* lo, const std::int32_t* hi,
                                    std::size_t count, double cost, const double* dist_to_top)
{
    const __m256d c = _mm256_set1_pd(cost);
    const __m256d inf = _mm256_set1_pd(__builtin_inf());
    __m256d acc0 = inf;
    __m256d acc1 = inf;
    std::size_t v = 0;
    for (; v + 4 <= count; v += 4) {
        const __m256d r = _mm256_loadu_pd(from_root + v);
        const __m128i lo_idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(lo + v));
        const __m128i hi_idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(hi + v));
        acc0 = _mm256_min_pd(_mm256_add_pd(r, _mm256_i32gather_pd(dist_to_top, lo_idx, 8)), acc0);
        acc1 = _mm256_min_pd(_mm256_add_pd(_mm256_add_pd(r, c), _mm256_i32gather_pd(dist_to_top, hi_idx, 8)), acc1);
    }
    alignas(32) double lanes0[4];
    alignas(32) double lanes1[4];
    _mm256_store_pd(lanes0, acc0);
    _mm256_store_pd(lanes1, acc1);
    MinMarginalPair mm = v < count ? scalar::layer_min_marginals(from_root + v, lo + v, hi + v, count - v, cost, dist_to_top)
                                   : MinMarginalPair{__builtin_inf(), __builtin_inf()};
    for (int l = 0; l < 4; ++l) {
        mm.m0 = lanes0[l] < mm.m0 ? lanes0[l] : mm.m0;
        mm.m1 = lanes1[l] < mm.m1 ? lanes1[l] : mm.m1;
    }
    return mm;
}

#else

bool compiled() { return false; }

void relax_backward(const std::int32_t* lo, const std::int32_t* hi, std::size_t count, double cost,
                    const double* dist_to_top, double* out)
{
    scalar::relax_backward(lo, hi, count, cost, dist_to_top, out);
}

MinMarginalPair layer_min_marginals(const double* from_root, const std::int32_t* lo, const std::int32_t* hi,
                                    std::size_t count, double cost, const double* dist_to_top)
{
    return scalar::layer_min_marginals(from_root, lo, hi, count, cost, dist_to_top);
}

#endif

} // namespace bddmma::kernels::avx2
