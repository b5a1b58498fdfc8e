// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <cstdlib>
#include <cstring>

#include "bhfr/kernels.hpp"

namespace bhfr::kernels {
namespace {

const KernelTable* detect() {
    const char* env = std::getenv("BHFR_FORCE_SCALAR");
    const bool forced_scalar = env != nullptr && env[0] != '\0' && std::strcmp(env, "0") != 0;
    if (!forced_scalar && cpu_has_avx2() && avx2_table() != nullptr) return avx2_table();
    return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
    static std::atomic<const KernelTable*> table{detect()};
    return table;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void force(Isa isa) {
    if (isa == Isa::avx2) {
        if (avx2_table() == nullptr || !cpu_has_avx2()) return;
        slot().store(avx2_table(), std::memory_order_release);
    } else {
        slot().store(&scalar_table(), std::memory_order_release);
    }
}

}  // namespace bhfr::kernels
