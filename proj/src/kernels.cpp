#include "kernels_impl.h"

#include <atomic>
#include <cstdlib>
#include <string>

namespace bddmma::kernels {

std::string_view to_string(Isa isa)
{
    return isa == Isa::avx2 ? "avx2" : "scalar";
}

const KernelTable& scalar_table()
{
    static const KernelTable table{Isa::scalar, &scalar::relax_backward, &scalar::layer_min_marginals, &scalar::relax_forward};
    return table;
}

namespace {

bool cpu_has_avx2()
{
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const KernelTable* initial_table()
{
    const KernelTable* best = avx2_table() ? avx2_table() : &scalar_table();
    if (const char* env = std::getenv("BDDMMA_KERNELS")) {
        const std::string want(env);
        if (want == "scalar")
            return &scalar_table();
        if (want == "avx2" && avx2_table())
            return avx2_table();
    }
    return best;
}

std::atomic<const KernelTable*>& current()
{
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

} // namespace

const KernelTable* avx2_table()
{
    // the forward relaxation is a scatter-min; it has no AVX2 form
    static const KernelTable table{Isa::avx2, &avx2::relax_backward, &avx2::layer_min_marginals, &scalar::relax_forward};
    static const bool available = avx2::compiled() && cpu_has_avx2();
    return available ? &table : nullptr;
}

const KernelTable& active()
{
    return *current().load(std::memory_order_acquire);
}

bool select(Isa isa)
{
    const KernelTable* table = isa == Isa::avx2 ? avx2_table() : &scalar_table();
    if (!table)
        return false;
    current().store(table, std::memory_order_release);
    return true;
}

} // namespace bddmma::kernels
