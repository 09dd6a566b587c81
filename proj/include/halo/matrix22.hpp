// Exact 2x2 integer matrices mod +-1, cusps, and P^1(Z/N) labels.
//
// Conventions (locked project-wide):
//   path e_g for g = (a b; c d), det = +-1, goes from b/d to a/c
//   [e_g] = {a/c} - {b/d}
//   mod +-1 normalization: first nonzero entry of the first column positive
//   tau = (0 -1; 1 -1) cycles inf -> 0 -> 1 -> inf; sigma = (0 -1; 1 0)
//   triangle gR has clockwise edges {e_g, e_{g tau}, e_{g tau^2}}
//   reverse(e_g) = e_{g sigma}
#pragma once

#include <cassert>
#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace halo {

inline int64_t checked_add(int64_t x, int64_t y) {
  int64_t r;
  if (__builtin_add_overflow(x, y, &r)) throw std::overflow_error("int64 add");
  return r;
}
inline int64_t checked_mul(int64_t x, int64_t y) {
  int64_t r;
  if (__builtin_mul_overflow(x, y, &r)) throw std::overflow_error("int64 mul");
  return r;
}

struct Mat22 {
  int64_t a = 0, b = 0, c = 0, d = 0;
  // lex order on (a,b,c,d): the deterministic tie-break everywhere
  auto operator<=>(const Mat22&) const = default;
};

inline constexpr Mat22 MAT_ID{1, 0, 0, 1};
inline constexpr Mat22 MAT_TAU{0, -1, 1, -1};
inline constexpr Mat22 MAT_TAU2{-1, 1, -1, 0};
inline constexpr Mat22 MAT_SIGMA{0, -1, 1, 0};

inline Mat22 mmul(const Mat22& A, const Mat22& B) {
  return Mat22{checked_add(checked_mul(A.a, B.a), checked_mul(A.b, B.c)),
               checked_add(checked_mul(A.a, B.b), checked_mul(A.b, B.d)),
               checked_add(checked_mul(A.c, B.a), checked_mul(A.d, B.c)),
               checked_add(checked_mul(A.c, B.b), checked_mul(A.d, B.d))};
}

inline int64_t mdet(const Mat22& A) {
  return checked_add(checked_mul(A.a, A.d), -checked_mul(A.b, A.c));
}

inline Mat22 minv(const Mat22& A) {
  int64_t det = mdet(A);
  assert(det == 1 || det == -1);
  if (det == 1) return Mat22{A.d, -A.b, -A.c, A.a};
  return Mat22{-A.d, A.b, A.c, -A.a};
}

inline Mat22 normalize_pm(const Mat22& A) {
  int64_t s = A.a != 0 ? (A.a > 0 ? 1 : -1) : (A.c > 0 ? 1 : -1);
  return Mat22{A.a * s, A.b * s, A.c * s, A.d * s};
}

struct Cusp {
  int64_t num = 1, den = 0;  // infinity = (1,0); den >= 0; gcd = 1
  auto operator<=>(const Cusp&) const = default;
};

inline Cusp cusp_of(int64_t num, int64_t den) {
  if (den == 0) return Cusp{1, 0};
  int64_t g = std::gcd(num < 0 ? -num : num, den < 0 ? -den : den);
  num /= g;
  den /= g;
  if (den < 0) {
    num = -num;
    den = -den;
  }
  return Cusp{num, den};
}

inline Cusp path_from(const Mat22& A) { return cusp_of(A.b, A.d); }
inline Cusp path_to(const Mat22& A) { return cusp_of(A.a, A.c); }

inline bool cusp_in_inf_orbit(const Cusp& c, int64_t N) { return c.den % N == 0; }

using P1Key = std::pair<int64_t, int64_t>;

// canonical label of (c:d) in P^1(Z/N): lex-least unit multiple
inline P1Key p1_key(int64_t c, int64_t d, int64_t N) {
  c = ((c % N) + N) % N;
  d = ((d % N) + N) % N;
  P1Key best{-1, -1};
  bool have = false;
  for (int64_t u = 1; u < N; u++) {
    if (std::gcd(u, N) != 1) continue;
    P1Key k{u * c % N, u * d % N};
    if (!have || k < best) {
      best = k;
      have = true;
    }
  }
  if (N == 1) return {0, 0};
  return best;
}

inline P1Key coset_key(const Mat22& A, int64_t N) { return p1_key(A.c, A.d, N); }

inline std::string cusp_str(const Cusp& c) {
  if (c.den == 0) return "inf";
  if (c.den == 1) return std::to_string(c.num);
  return std::to_string(c.num) + "/" + std::to_string(c.den);
}

}  // namespace halo
