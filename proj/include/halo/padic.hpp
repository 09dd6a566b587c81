// Fixed-precision p-adic integers and truncated Iwasawa-algebra series.
//
// Two representations, chosen by role:
//  - Zw: residues mod p^M on a fixed mpn limb buffer (M up to ~640 digits at
//    p=3).  Used wherever guard-digit headroom matters: Fredholm coefficients,
//    exact charpolys, Newton-identity divisions.
//  - TSeries: truncated series sum b_m T^m with coefficients in Z/p^M for
//    p^M < 2^63, coefficients packed in plain uint64_t.  This is the hot type;
//    the multiply kernels in kernels.hpp exploit q < 2^45 for lazy reduction.
//
// Valuations are three-valued throughout: a residue that is 0 mod p^M only
// certifies v >= M, and every predicate downstream keeps that distinction.
#pragma once

#include <gmp.h>

#include <cassert>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace halo {

inline constexpr int ZQ_CAP = 16;  // limb capacity: moduli up to 1024 bits

struct PadicCtx {
  unsigned p = 3;
  unsigned M = 0;  // modulus is p^M
  int L = 0;       // limbs occupied by p^M
  mp_limb_t mod[ZQ_CAP] = {};
  std::vector<std::vector<mp_limb_t>> pw;  // pw[e] = limbs of p^e, e = 0..M
  unsigned e64 = 0;                        // max e with p^e < 2^64
  std::vector<uint64_t> pe64;              // p^e for e <= e64

  static PadicCtx make(unsigned p, unsigned M);
};

// Residue mod p^M, always fully reduced.  Operations take the ctx explicitly;
// mixing values from different contexts is a caller bug.
struct Zw {
  mp_limb_t d[ZQ_CAP] = {};

  static Zw zero() { return Zw{}; }
  static Zw from_u64(const PadicCtx& C, uint64_t v);
  static Zw from_i64(const PadicCtx& C, int64_t v);
  static Zw from_dec(const PadicCtx& C, const std::string& s);

  bool is_zero(const PadicCtx& C) const;
  bool eq(const PadicCtx& C, const Zw& o) const;
  Zw add(const PadicCtx& C, const Zw& o) const;
  Zw sub(const PadicCtx& C, const Zw& o) const;
  Zw neg(const PadicCtx& C) const;
  Zw mul(const PadicCtx& C, const Zw& o) const;
  Zw mul_u64(const PadicCtx& C, uint64_t v) const;
  // Exact division by p^e; asserts divisibility.
  Zw divexact_p(const PadicCtx& C, unsigned e) const;
  // Reduce mod p^e (e <= M).
  Zw reduce(const PadicCtx& C, unsigned e) const;
  // Valuation: v if v < M is exact; returns M when the residue is 0 (>= M).
  unsigned vp(const PadicCtx& C) const;
  // Inverse of a unit (v_p = 0); asserts unit.
  Zw inv(const PadicCtx& C) const;
  Zw pow_u64(const PadicCtx& C, uint64_t e) const;
  uint64_t low_u64() const { return d[0]; }
  std::string to_dec(const PadicCtx& C) const;
};

// Element of Z/p^abs_prec with explicit precision tracking.  abs_prec never
// exceeds the ctx's M; the residue is kept reduced mod p^abs_prec.
struct PAdicInt {
  Zw v;
  unsigned abs_prec = 0;

  static PAdicInt make(const PadicCtx& C, const Zw& z, unsigned prec);
  static PAdicInt from_u64(const PadicCtx& C, uint64_t x, unsigned prec);
  static PAdicInt from_i64(const PadicCtx& C, int64_t x, unsigned prec);

  PAdicInt add(const PadicCtx& C, const PAdicInt& o) const;
  PAdicInt sub(const PadicCtx& C, const PAdicInt& o) const;
  PAdicInt mul(const PadicCtx& C, const PAdicInt& o) const;
  // Division by p^e: requires v_p >= e, costs e digits of absolute precision.
  PAdicInt divexact_p(const PadicCtx& C, unsigned e) const;

  struct Valuation {
    unsigned v;
    bool exact;  // false: only "v >= abs_prec" is certified
  };
  Valuation valuation(const PadicCtx& C) const;
};

// Z/q arithmetic for q = p^M < 2^63, used by the series layer.
struct SmallRing {
  unsigned p = 3, M = 0;
  uint64_t q = 1;
  std::vector<uint64_t> pe;  // p^e, e = 0..M

  static SmallRing make(unsigned p, unsigned M);
  uint64_t add(uint64_t a, uint64_t b) const {
    uint64_t s = a + b;
    return s >= q ? s - q : s;
  }
  uint64_t sub(uint64_t a, uint64_t b) const { return a >= b ? a - b : a + q - b; }
  uint64_t neg(uint64_t a) const { return a ? q - a : 0; }
  uint64_t mul(uint64_t a, uint64_t b) const {
    return (uint64_t)((unsigned __int128)a * b % q);
  }
  uint64_t reduce128(unsigned __int128 x) const { return (uint64_t)(x % q); }
  unsigned vp(uint64_t a) const;  // M when a == 0
  uint64_t divexact_p(uint64_t a, unsigned e) const;
  uint64_t inv(uint64_t a) const;  // unit inverse
  uint64_t pow(uint64_t a, uint64_t e) const;
  uint64_t from_i64(int64_t x) const {
    int64_t r = x % (int64_t)q;
    return r < 0 ? (uint64_t)(r + (int64_t)q) : (uint64_t)r;
  }
};

// Shared window for a family of series: coefficients mod p^M, degrees < K.
struct TsRing {
  SmallRing R;
  unsigned K = 0;

  static TsRing make(unsigned p, unsigned M, unsigned K) {
    return TsRing{SmallRing::make(p, M), K};
  }
};

struct TSeries {
  std::vector<uint64_t> c;  // size K

  static TSeries zero(const TsRing& T) { return TSeries{std::vector<uint64_t>(T.K, 0)}; }
  static TSeries one(const TsRing& T) {
    TSeries s = zero(T);
    s.c[0] = 1;
    return s;
  }
  static TSeries from_coeffs(const TsRing& T, std::vector<uint64_t> v) {
    v.resize(T.K, 0);
    return TSeries{std::move(v)};
  }
  bool is_zero() const {
    for (uint64_t x : c)
      if (x) return false;
    return true;
  }
};

TSeries ts_add(const TsRing& T, const TSeries& a, const TSeries& b);
TSeries ts_sub(const TsRing& T, const TSeries& a, const TSeries& b);
TSeries ts_neg(const TsRing& T, const TSeries& a);
TSeries ts_scale(const TsRing& T, uint64_t s, const TSeries& a);
TSeries ts_mul(const TsRing& T, const TSeries& a, const TSeries& b);

// (p,T)-adic valuation min_m (v_p(b_m) + m), certified to `cert` p-digits
// per coefficient (cert = M by default; spectral passes M - guard_loss).
// A coefficient that is 0 mod p^cert only floors its term at cert + m.
struct MVal {
  long v = 0;
  bool exact = false;  // false: only v >= .v is certified
  bool is_zero_window = false;
};
MVal tseries_mval(const TsRing& T, const TSeries& a, std::optional<unsigned> cert = {});

// Exact rational with overflow-checked int64 arithmetic (valuations, slopes).
struct Rational {
  int64_t num = 0, den = 1;  // den > 0, gcd(|num|,den) = 1

  Rational() = default;
  Rational(int64_t n) : num(n), den(1) {}
  Rational(int64_t n, int64_t d);
  static Rational of(int64_t n, int64_t d) { return Rational(n, d); }

  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const;
  bool operator<=(const Rational& o) const { return *this < o || *this == o; }
  bool operator>(const Rational& o) const { return o < *this; }
  bool operator>=(const Rational& o) const { return o <= *this; }
  std::string str() const;
};

unsigned vp_u64(unsigned p, uint64_t n);      // valuation of a nonzero integer
unsigned vp_factorial(unsigned p, uint64_t n);  // v_p(n!) by Legendre

}  // namespace halo
