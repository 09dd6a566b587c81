#include "halo/padic.hpp"

#include <stdexcept>

#include "halo/kernels.hpp"

namespace halo {

namespace {

void import_mpz(mpz_t z, const mp_limb_t* d, int L) {
  mpz_import(z, (size_t)L, -1, sizeof(mp_limb_t), 0, 0, d);
}

void export_mpz(mp_limb_t* d, int L, const mpz_t z) {
  size_t count = 0;
  for (int i = 0; i < L; i++) d[i] = 0;
  mpz_export(d, &count, -1, sizeof(mp_limb_t), 0, 0, z);
  assert((int)count <= L);
}

}  // namespace

PadicCtx PadicCtx::make(unsigned p, unsigned M) {
  assert(p >= 2 && M >= 1);
  PadicCtx C;
  C.p = p;
  C.M = M;
  C.pw.resize(M + 1);
  C.pw[0] = {1};
  for (unsigned e = 1; e <= M; e++) {
    const auto& prev = C.pw[e - 1];
    std::vector<mp_limb_t> cur(prev.size() + 1, 0);
    mp_limb_t carry = mpn_mul_1(cur.data(), prev.data(), prev.size(), p);
    cur[prev.size()] = carry;
    while (cur.size() > 1 && cur.back() == 0) cur.pop_back();
    if ((int)cur.size() > ZQ_CAP) throw std::overflow_error("p^M exceeds limb capacity");
    C.pw[e] = std::move(cur);
  }
  C.L = (int)C.pw[M].size();
  for (int i = 0; i < C.L; i++) C.mod[i] = C.pw[M][i];
  uint64_t v = 1;
  C.pe64 = {1};
  while (v <= UINT64_MAX / p) {
    v *= p;
    C.pe64.push_back(v);
    C.e64++;
  }
  return C;
}

Zw Zw::from_u64(const PadicCtx& C, uint64_t v) {
  Zw r;
  r.d[0] = C.L == 1 ? v % C.mod[0] : v;
  return r;
}

Zw Zw::from_i64(const PadicCtx& C, int64_t v) {
  if (v >= 0) return from_u64(C, (uint64_t)v);
  return from_u64(C, (uint64_t)(-v)).neg(C);
}

Zw Zw::from_dec(const PadicCtx& C, const std::string& s) {
  mpz_t z, m;
  mpz_inits(z, m, nullptr);
  mpz_set_str(z, s.c_str(), 10);
  import_mpz(m, C.mod, C.L);
  mpz_mod(z, z, m);
  Zw r;
  export_mpz(r.d, ZQ_CAP, z);
  mpz_clears(z, m, nullptr);
  return r;
}

bool Zw::is_zero(const PadicCtx& C) const {
  for (int i = 0; i < C.L; i++)
    if (d[i]) return false;
  return true;
}

bool Zw::eq(const PadicCtx& C, const Zw& o) const {
  for (int i = 0; i < C.L; i++)
    if (d[i] != o.d[i]) return false;
  return true;
}

Zw Zw::add(const PadicCtx& C, const Zw& o) const {
  Zw r;
  mp_limb_t cy = mpn_add_n(r.d, d, o.d, C.L);
  if (cy || mpn_cmp(r.d, C.mod, C.L) >= 0) mpn_sub_n(r.d, r.d, C.mod, C.L);
  return r;
}

Zw Zw::sub(const PadicCtx& C, const Zw& o) const {
  Zw r;
  mp_limb_t bw = mpn_sub_n(r.d, d, o.d, C.L);
  if (bw) mpn_add_n(r.d, r.d, C.mod, C.L);
  return r;
}

Zw Zw::neg(const PadicCtx& C) const {
  if (is_zero(C)) return Zw::zero();
  Zw r;
  mpn_sub_n(r.d, C.mod, d, C.L);
  return r;
}

Zw Zw::mul(const PadicCtx& C, const Zw& o) const {
  mp_limb_t prod[2 * ZQ_CAP], q[ZQ_CAP + 1];
  mpn_mul(prod, d, C.L, o.d, C.L);
  Zw r;
  mpn_tdiv_qr(q, r.d, 0, prod, 2 * C.L, C.mod, C.L);
  return r;
}

Zw Zw::mul_u64(const PadicCtx& C, uint64_t v) const {
  mp_limb_t prod[ZQ_CAP + 1], q[ZQ_CAP + 1];
  prod[C.L] = mpn_mul_1(prod, d, C.L, v);
  Zw r;
  mpn_tdiv_qr(q, r.d, 0, prod, C.L + 1, C.mod, C.L);
  return r;
}

Zw Zw::divexact_p(const PadicCtx& C, unsigned e) const {
  Zw r = *this;
  unsigned left = e;
  while (left > 0) {
    unsigned step = left < C.e64 ? left : C.e64;
    mp_limb_t rem = mpn_divrem_1(r.d, 0, r.d, C.L, C.pe64[step]);
    assert(rem == 0 && "divexact_p: value not divisible");
    (void)rem;
    left -= step;
  }
  return r;
}

Zw Zw::reduce(const PadicCtx& C, unsigned e) const {
  assert(e <= C.M);
  if (e == C.M) return *this;
  const auto& pe = C.pw[e];
  int le = (int)pe.size();
  mp_limb_t q[ZQ_CAP + 1];
  Zw r;
  mpn_tdiv_qr(q, r.d, 0, d, C.L, pe.data(), le);
  for (int i = le; i < ZQ_CAP; i++) r.d[i] = 0;
  return r;
}

unsigned Zw::vp(const PadicCtx& C) const {
  if (is_zero(C)) return C.M;
  Zw t = *this;
  unsigned v = 0;
  while (v < C.M) {
    Zw u = t;
    mp_limb_t rem = mpn_divrem_1(u.d, 0, u.d, C.L, C.p);
    if (rem != 0) break;
    t = u;
    v++;
  }
  return v;
}

Zw Zw::inv(const PadicCtx& C) const {
  mpz_t z, m;
  mpz_inits(z, m, nullptr);
  import_mpz(z, d, C.L);
  import_mpz(m, C.mod, C.L);
  int ok = mpz_invert(z, z, m);
  assert(ok && "inv: not a unit");
  (void)ok;
  Zw r;
  export_mpz(r.d, ZQ_CAP, z);
  mpz_clears(z, m, nullptr);
  return r;
}

Zw Zw::pow_u64(const PadicCtx& C, uint64_t e) const {
  Zw base = *this, acc = Zw::from_u64(C, 1);
  while (e) {
    if (e & 1) acc = acc.mul(C, base);
    base = base.mul(C, base);
    e >>= 1;
  }
  return acc;
}

std::string Zw::to_dec(const PadicCtx& C) const {
  mpz_t z;
  mpz_init(z);
  import_mpz(z, d, C.L);
  char* s = mpz_get_str(nullptr, 10, z);
  std::string out(s);
  void (*freefn)(void*, size_t) = nullptr;
  mp_get_memory_functions(nullptr, nullptr, &freefn);
  freefn(s, out.size() + 1);
  mpz_clear(z);
  return out;
}

PAdicInt PAdicInt::make(const PadicCtx& C, const Zw& z, unsigned prec) {
  assert(prec <= C.M);
  return PAdicInt{z.reduce(C, prec), prec};
}

PAdicInt PAdicInt::from_u64(const PadicCtx& C, uint64_t x, unsigned prec) {
  return make(C, Zw::from_u64(C, x), prec);
}

PAdicInt PAdicInt::from_i64(const PadicCtx& C, int64_t x, unsigned prec) {
  return make(C, Zw::from_i64(C, x), prec);
}

PAdicInt PAdicInt::add(const PadicCtx& C, const PAdicInt& o) const {
  unsigned m = abs_prec < o.abs_prec ? abs_prec : o.abs_prec;
  return make(C, v.add(C, o.v), m);
}

PAdicInt PAdicInt::sub(const PadicCtx& C, const PAdicInt& o) const {
  unsigned m = abs_prec < o.abs_prec ? abs_prec : o.abs_prec;
  return make(C, v.sub(C, o.v), m);
}

PAdicInt PAdicInt::mul(const PadicCtx& C, const PAdicInt& o) const {
  unsigned m = abs_prec < o.abs_prec ? abs_prec : o.abs_prec;
  return make(C, v.mul(C, o.v), m);
}

PAdicInt PAdicInt::divexact_p(const PadicCtx& C, unsigned e) const {
  assert(e <= abs_prec);
  return PAdicInt{v.divexact_p(C, e), abs_prec - e};
}

PAdicInt::Valuation PAdicInt::valuation(const PadicCtx& C) const {
  unsigned w = v.vp(C);
  if (w >= abs_prec) return {abs_prec, false};
  return {w, true};
}

SmallRing SmallRing::make(unsigned p, unsigned M) {
  SmallRing R;
  R.p = p;
  R.M = M;
  R.pe.resize(M + 1);
  R.pe[0] = 1;
  for (unsigned e = 1; e <= M; e++) {
    assert(R.pe[e - 1] <= (((uint64_t)1 << 62) / p) && "SmallRing: p^M too large");
    R.pe[e] = R.pe[e - 1] * p;
  }
  R.q = R.pe[M];
  return R;
}

unsigned SmallRing::vp(uint64_t a) const {
  if (a == 0) return M;
  unsigned v = 0;
  while (v < M && a % p == 0) {
    a /= p;
    v++;
  }
  return v;
}

uint64_t SmallRing::divexact_p(uint64_t a, unsigned e) const {
  assert(a % pe[e] == 0 && "divexact_p: not divisible");
  return a / pe[e];
}

uint64_t SmallRing::inv(uint64_t a) const {
  assert(a % p != 0 && "inv: not a unit");
  // extended Euclid on (a, q)
  __int128 r0 = (__int128)q, r1 = a % q, s0 = 0, s1 = 1;
  while (r1 != 0) {
    __int128 k = r0 / r1;
    __int128 r2 = r0 - k * r1, s2 = s0 - k * s1;
    r0 = r1;
    r1 = r2;
    s0 = s1;
    s1 = s2;
  }
  assert(r0 == 1);
  __int128 s = s0 % (__int128)q;
  if (s < 0) s += q;
  return (uint64_t)s;
}

uint64_t SmallRing::pow(uint64_t a, uint64_t e) const {
  uint64_t acc = 1 % q, b = a % q;
  while (e) {
    if (e & 1) acc = mul(acc, b);
    b = mul(b, b);
    e >>= 1;
  }
  return acc;
}

TSeries ts_add(const TsRing& T, const TSeries& a, const TSeries& b) {
  TSeries r = TSeries::zero(T);
  for (unsigned m = 0; m < T.K; m++) r.c[m] = T.R.add(a.c[m], b.c[m]);
  return r;
}

TSeries ts_sub(const TsRing& T, const TSeries& a, const TSeries& b) {
  TSeries r = TSeries::zero(T);
  for (unsigned m = 0; m < T.K; m++) r.c[m] = T.R.sub(a.c[m], b.c[m]);
  return r;
}

TSeries ts_neg(const TsRing& T, const TSeries& a) {
  TSeries r = TSeries::zero(T);
  for (unsigned m = 0; m < T.K; m++) r.c[m] = T.R.neg(a.c[m]);
  return r;
}

TSeries ts_scale(const TsRing& T, uint64_t s, const TSeries& a) {
  TSeries r = TSeries::zero(T);
  for (unsigned m = 0; m < T.K; m++) r.c[m] = T.R.mul(s, a.c[m]);
  return r;
}

TSeries ts_mul(const TsRing& T, const TSeries& a, const TSeries& b) {
  TSeries r = TSeries::zero(T);
  select_ts_mul(T.R)(r.c.data(), a.c.data(), b.c.data(), T.K, T.R);
  return r;
}

MVal tseries_mval(const TsRing& T, const TSeries& a, std::optional<unsigned> cert_opt) {
  unsigned cert = cert_opt.value_or(T.R.M);
  if (cert > T.R.M) cert = T.R.M;
  long best_exact = -1;   // min over coefficients with certified valuation
  long best_floor = T.K;  // T^K tail floors everything at K
  bool any_nonzero = false;
  for (unsigned m = 0; m < T.K; m++) {
    unsigned v = T.R.vp(a.c[m]);
    if (v >= cert) {
      long fl = (long)cert + (long)m;
      if (fl < best_floor) best_floor = fl;
    } else {
      any_nonzero = true;
      long val = (long)v + (long)m;
      if (best_exact < 0 || val < best_exact) best_exact = val;
    }
  }
  if (!any_nonzero) {
    long fl = best_floor < (long)cert ? best_floor : (long)cert;
    return MVal{fl, false, true};
  }
  if (best_exact <= best_floor) return MVal{best_exact, true, false};
  return MVal{best_floor, false, false};
}

Rational::Rational(int64_t n, int64_t d) {
  assert(d != 0);
  if (d < 0) {
    n = -n;
    d = -d;
  }
  int64_t g = std::gcd(n < 0 ? -n : n, d);
  if (g == 0) g = 1;
  num = n / g;
  den = d / g;
}

namespace {
Rational rat_from_i128(__int128 n, __int128 d) {
  assert(d != 0);
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 a = n < 0 ? -n : n, b = d;
  while (b) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a == 0) a = 1;
  n /= a;
  d /= a;
  assert(n <= INT64_MAX && n >= INT64_MIN && d <= INT64_MAX && "rational overflow");
  Rational r;
  r.num = (int64_t)n;
  r.den = (int64_t)d;
  return r;
}
}  // namespace

Rational Rational::operator+(const Rational& o) const {
  return rat_from_i128((__int128)num * o.den + (__int128)o.num * den, (__int128)den * o.den);
}
Rational Rational::operator-(const Rational& o) const {
  return rat_from_i128((__int128)num * o.den - (__int128)o.num * den, (__int128)den * o.den);
}
Rational Rational::operator*(const Rational& o) const {
  return rat_from_i128((__int128)num * o.num, (__int128)den * o.den);
}
Rational Rational::operator/(const Rational& o) const {
  assert(o.num != 0);
  return rat_from_i128((__int128)num * o.den, (__int128)den * o.num);
}
bool Rational::operator<(const Rational& o) const {
  return (__int128)num * o.den < (__int128)o.num * den;
}
std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

unsigned vp_u64(unsigned p, uint64_t n) {
  assert(n != 0);
  unsigned v = 0;
  while (n % p == 0) {
    n /= p;
    v++;
  }
  return v;
}

unsigned vp_factorial(unsigned p, uint64_t n) {
  unsigned s = 0;
  while (n) {
    n /= p;
    s += (unsigned)n;
  }
  return s;
}

}  // namespace halo
