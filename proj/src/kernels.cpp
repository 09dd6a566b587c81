#include "halo/kernels.hpp"

#include <cassert>

#include "halo/padic.hpp"

namespace halo {

void ts_mul_generic(uint64_t* out, const uint64_t* a, const uint64_t* b, unsigned K,
                    const SmallRing& R) {
  for (unsigned m = 0; m < K; m++) {
    uint64_t acc = 0;
    for (unsigned i = 0; i <= m; i++) acc = R.add(acc, R.mul(a[i], b[m - i]));
    out[m] = acc;
  }
}

// One u128 accumulator per output coefficient; terms < q^2 < 2^90, so up to
// 2^38 terms fit without overflow.  One division per coefficient.
void ts_mul_lazy_scalar(uint64_t* out, const uint64_t* a, const uint64_t* b, unsigned K,
                        const SmallRing& R) {
  assert(R.q < KERNEL_LAZY_QMAX);
  for (unsigned m = 0; m < K; m++) {
    unsigned __int128 acc = 0;
    for (unsigned i = 0; i <= m; i++) acc += (unsigned __int128)a[i] * b[m - i];
    out[m] = R.reduce128(acc);
  }
}

void ts_dot_generic(uint64_t* out, const uint64_t* a, const uint64_t* b, size_t n,
                    size_t bstride, unsigned K, const SmallRing& R) {
  for (size_t t = 0; t < n; t++) {
    const uint64_t* at = a + t * K;
    const uint64_t* bt = b + t * bstride;
    for (unsigned m = 0; m < K; m++) {
      uint64_t acc = out[m];
      for (unsigned i = 0; i <= m; i++) acc = R.add(acc, R.mul(at[i], bt[m - i]));
      out[m] = acc;
    }
  }
}

void ts_dot_lazy_scalar(uint64_t* out, const uint64_t* a, const uint64_t* b, size_t n,
                        size_t bstride, unsigned K, const SmallRing& R) {
  assert(R.q < KERNEL_LAZY_QMAX && K <= KERNEL_MAX_K);
  unsigned __int128 acc[KERNEL_MAX_K];
  for (unsigned m = 0; m < K; m++) acc[m] = out[m];
  // terms < 2^90, n*K <= 2^38 assumed (reference: 264*48 ~ 2^14)
  for (size_t t = 0; t < n; t++) {
    const uint64_t* at = a + t * K;
    const uint64_t* bt = b + t * bstride;
    for (unsigned i = 0; i < K; i++) {
      uint64_t ai = at[i];
      if (!ai) continue;
      for (unsigned j = 0; j < K - i; j++) acc[i + j] += (unsigned __int128)ai * bt[j];
    }
  }
  for (unsigned m = 0; m < K; m++) out[m] = R.reduce128(acc[m]);
}

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

ts_mul_fn select_ts_mul(const SmallRing& R) {
  if (R.q < KERNEL_LAZY_QMAX) {
#if defined(__x86_64__)
    if (cpu_has_avx2()) return ts_mul_avx2;
#endif
    return ts_mul_lazy_scalar;
  }
  return ts_mul_generic;
}

ts_dot_fn select_ts_dot(const SmallRing& R) {
  if (R.q < KERNEL_LAZY_QMAX) {
#if defined(__x86_64__)
    if (cpu_has_avx2()) return ts_dot_avx2;
#endif
    return ts_dot_lazy_scalar;
  }
  return ts_dot_generic;
}

#if !defined(__x86_64__)
void ts_mul_avx2(uint64_t* out, const uint64_t* a, const uint64_t* b, unsigned K,
                 const SmallRing& R) {
  ts_mul_lazy_scalar(out, a, b, K, R);
}
void ts_dot_avx2(uint64_t* out, const uint64_t* a, const uint64_t* b, size_t n,
                 size_t bstride, unsigned K, const SmallRing& R) {
  ts_dot_lazy_scalar(out, a, b, n, bstride, K, R);
}
#endif

}  // namespace halo
