// Truncated-series multiply kernels: scalar reference implementations and an
// AVX2 variant selected at runtime.  All three compute the same map; the test
// suite checks them against each other on random inputs.
//
// Lazy variants require q < 2^45 so that 23-bit operand splits keep partial
// sums inside u64 lanes (AVX2) or a single u128 accumulator (scalar).
#pragma once

#include <cstddef>
#include <cstdint>

namespace halo {

struct SmallRing;

// out[m] = sum_{i+j=m} a[i]*b[j] mod q, for m < K.  out must not alias a or b.
using ts_mul_fn = void (*)(uint64_t* out, const uint64_t* a, const uint64_t* b,
                           unsigned K, const SmallRing& R);

void ts_mul_generic(uint64_t* out, const uint64_t* a, const uint64_t* b, unsigned K,
                    const SmallRing& R);
void ts_mul_lazy_scalar(uint64_t* out, const uint64_t* a, const uint64_t* b, unsigned K,
                        const SmallRing& R);
void ts_mul_avx2(uint64_t* out, const uint64_t* a, const uint64_t* b, unsigned K,
                 const SmallRing& R);

// Accumulating block dot product: out[m] += sum_{t<n} (A_t * B_t)[m] where the
// A blocks are contiguous K-vectors (stride K) and the B blocks are strided by
// bstride u64s.  This is the matmul inner loop; out starts zeroed.
using ts_dot_fn = void (*)(uint64_t* out, const uint64_t* a, const uint64_t* b, size_t n,
                           size_t bstride, unsigned K, const SmallRing& R);

void ts_dot_generic(uint64_t* out, const uint64_t* a, const uint64_t* b, size_t n,
                    size_t bstride, unsigned K, const SmallRing& R);
void ts_dot_lazy_scalar(uint64_t* out, const uint64_t* a, const uint64_t* b, size_t n,
                        size_t bstride, unsigned K, const SmallRing& R);
void ts_dot_avx2(uint64_t* out, const uint64_t* a, const uint64_t* b, size_t n,
                 size_t bstride, unsigned K, const SmallRing& R);

bool cpu_has_avx2();
ts_mul_fn select_ts_mul(const SmallRing& R);
ts_dot_fn select_ts_dot(const SmallRing& R);

inline constexpr unsigned KERNEL_MAX_K = 64;
inline constexpr uint64_t KERNEL_LAZY_QMAX = (uint64_t)1 << 45;

}  // namespace halo
