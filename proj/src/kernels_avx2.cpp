// AVX2 convolution kernels.  Coefficients are < q < 2^45 and get split into
// 23-bit halves so _mm256_mul_epu32 partial products stay under 2^46; three
// u64 accumulator arrays then tolerate 2^17 accumulations before overflow,
// which covers n*K at the reference scale (264*48) in one pass.  Larger jobs
// flush to u128 totals periodically.
#include <immintrin.h>

#include <cassert>
#include <cstring>

#include "halo/kernels.hpp"
#include "halo/padic.hpp"

namespace halo {

namespace {

constexpr unsigned KPAD = KERNEL_MAX_K + 8;
constexpr uint64_t MASK23 = ((uint64_t)1 << 23) - 1;

struct SplitAcc {
  alignas(32) uint64_t a0[KPAD];
  alignas(32) uint64_t a1[KPAD];
  alignas(32) uint64_t a2[KPAD];

  void clear() {
    std::memset(a0, 0, sizeof a0);
    std::memset(a1, 0, sizeof a1);
    std::memset(a2, 0, sizeof a2);
  }

  // Add a * bpad[0..K) into slots [i, i+K); bpad must be readable (and zero)
  // through index K+3 so the 4-wide loop can overrun.
  void accumulate(uint64_t a, const uint64_t* bpad, unsigned i, unsigned K) {
    const __m256i alo = _mm256_set1_epi64x((long long)(a & MASK23));
    const __m256i ahi = _mm256_set1_epi64x((long long)(a >> 23));
    const __m256i mask = _mm256_set1_epi64x((long long)MASK23);
    for (unsigned j = 0; j < K; j += 4) {
      __m256i b = _mm256_loadu_si256((const __m256i*)(bpad + j));
      __m256i blo = _mm256_and_si256(b, mask);
      __m256i bhi = _mm256_srli_epi64(b, 23);
      __m256i* p0 = (__m256i*)(a0 + i + j);
      __m256i* p1 = (__m256i*)(a1 + i + j);
      __m256i* p2 = (__m256i*)(a2 + i + j);
      _mm256_storeu_si256(p0, _mm256_add_epi64(_mm256_loadu_si256(p0),
                                               _mm256_mul_epu32(alo, blo)));
      __m256i cross = _mm256_add_epi64(_mm256_mul_epu32(alo, bhi),
                                       _mm256_mul_epu32(ahi, blo));
      _mm256_storeu_si256(p1, _mm256_add_epi64(_mm256_loadu_si256(p1), cross));
      _mm256_storeu_si256(p2, _mm256_add_epi64(_mm256_loadu_si256(p2),
                                               _mm256_mul_epu32(ahi, bhi)));
    }
  }

  void flush(unsigned __int128* tot, unsigned K) {
    for (unsigned m = 0; m < K; m++) {
      tot[m] += (unsigned __int128)a0[m] + ((unsigned __int128)a1[m] << 23) +
                ((unsigned __int128)a2[m] << 46);
    }
    clear();
  }
};

}  // namespace

void ts_mul_avx2(uint64_t* out, const uint64_t* a, const uint64_t* b, unsigned K,
                 const SmallRing& R) {
  assert(R.q < KERNEL_LAZY_QMAX && K <= KERNEL_MAX_K);
  alignas(32) uint64_t bpad[KPAD];
  std::memset(bpad, 0, sizeof bpad);
  std::memcpy(bpad, b, K * sizeof(uint64_t));
  SplitAcc acc;
  acc.clear();
  for (unsigned i = 0; i < K; i++) {
    if (a[i]) acc.accumulate(a[i], bpad, i, K - i);
  }
  unsigned __int128 tot[KERNEL_MAX_K] = {};
  acc.flush(tot, K);
  for (unsigned m = 0; m < K; m++) out[m] = R.reduce128(tot[m]);
}

void ts_dot_avx2(uint64_t* out, const uint64_t* a, const uint64_t* b, size_t n,
                 size_t bstride, unsigned K, const SmallRing& R) {
  assert(R.q < KERNEL_LAZY_QMAX && K <= KERNEL_MAX_K);
  unsigned __int128 tot[KERNEL_MAX_K];
  for (unsigned m = 0; m < K; m++) tot[m] = out[m];
  // a1*b1 cross terms reach 2*2^45 per accumulate step, so cap the number of
  // (t, i) accumulations between flushes at 2^16.
  const size_t flush_every = ((size_t)1 << 16) / (K ? K : 1);
  SplitAcc acc;
  acc.clear();
  alignas(32) uint64_t bpad[KPAD];
  std::memset(bpad, 0, sizeof bpad);
  size_t since_flush = 0;
  for (size_t t = 0; t < n; t++) {
    const uint64_t* at = a + t * K;
    std::memcpy(bpad, b + t * bstride, K * sizeof(uint64_t));
    for (unsigned i = 0; i < K; i++) {
      if (at[i]) acc.accumulate(at[i], bpad, i, K - i);
    }
    if (++since_flush >= flush_every) {
      acc.flush(tot, K);
      since_flush = 0;
    }
  }
  acc.flush(tot, K);
  for (unsigned m = 0; m < K; m++) out[m] = R.reduce128(tot[m]);
}

}  // namespace halo
