#include "halo/weight.hpp"

#include <cassert>

namespace halo {

namespace {

// smallest n such that i - v_p(i!) >= M for the exp(p) series tail
unsigned exp_terms(unsigned p, unsigned M) {
  unsigned n = 1;
  while (n - vp_factorial(p, n) < M) n++;
  return n;
}

// smallest i such that i' - v_p(i') >= M for all i' >= i (log series tail);
// uses v_p(i') <= log_p(i'), and i' - log_p(i') is nondecreasing
unsigned log_terms(unsigned p, unsigned M) {
  unsigned i = 1;
  auto floorlog = [p](unsigned x) {
    unsigned e = 0;
    uint64_t v = p;
    while (v <= x) {
      v *= p;
      e++;
    }
    return e;
  };
  while (i < floorlog(i) + M) i++;
  return i;
}

unsigned floorlog(unsigned p, uint64_t x) {
  unsigned e = 0;
  uint64_t v = p;
  while (v <= x) {
    v *= p;
    e++;
  }
  return e;
}

}  // namespace

PAdicInt exp_p(const PadicCtx& C, unsigned M) {
  assert(M <= C.M);
  unsigned nmax = exp_terms(C.p, M);
  unsigned guard = vp_factorial(C.p, nmax);
  // extra floorlog digits absorb the union of per-term representation errors
  PadicCtx Cw = PadicCtx::make(C.p, M + guard + floorlog(C.p, nmax) + 2);
  Zw term = Zw::from_u64(Cw, 1), acc = Zw::from_u64(Cw, 1);
  for (unsigned n = 1; n <= nmax; n++) {
    term = term.mul_u64(Cw, C.p);
    unsigned e = vp_u64(C.p, n);
    uint64_t unit = n;
    for (unsigned k = 0; k < e; k++) unit /= C.p;
    term = term.divexact_p(Cw, e).mul(Cw, Zw::from_u64(Cw, unit).inv(Cw));
    acc = acc.add(Cw, term);
  }
  return PAdicInt::make(C, acc.reduce(Cw, M), M);
}

PAdicInt teichmuller(const PadicCtx& C, int64_t u, unsigned M) {
  assert(M <= C.M);
  int64_t r = u % (int64_t)C.p;
  if (r < 0) r += C.p;
  assert(r != 0 && "teichmuller: not a unit");
  Zw x = Zw::from_u64(C, (uint64_t)r).reduce(C, M);
  PadicCtx CM = PadicCtx::make(C.p, M);
  Zw y = x;
  for (unsigned it = 0; it <= M + 1; it++) y = y.pow_u64(CM, C.p);
  assert(y.eq(CM, y.pow_u64(CM, C.p)) && "teichmuller: no fixpoint");
  return PAdicInt::make(C, y, M);
}

Zw teich_pow(const PadicCtx& C, int64_t u, unsigned j) {
  return teichmuller(C, u, C.M).v.pow_u64(C, j % (C.p - 1));
}

Zw unit_part(const PadicCtx& C, int64_t u) {
  Zw uz = Zw::from_i64(C, u);
  Zw w = teichmuller(C, u, C.M).v;
  return uz.mul(C, w.inv(C));
}

PAdicInt plog(const PadicCtx& C, const PAdicInt& u) {
  unsigned Mu = u.abs_prec;
  Zw s = u.v.sub(C, Zw::from_u64(C, 1)).reduce(C, Mu);
  assert((s.is_zero(C) || s.vp(C) >= 1) && "plog: not a 1-unit");
  unsigned imax = log_terms(C.p, Mu);
  // static loss bound: worst v_p(i) over the whole truncation range, so the
  // advertised precision does not depend on where the series happens to vanish
  unsigned guard = floorlog(C.p, imax);
  Zw spow = Zw::from_u64(C, 1);
  Zw acc = Zw::zero();
  PadicCtx Cu = PadicCtx::make(C.p, Mu);
  Zw su = s.reduce(C, Mu);
  for (unsigned i = 1; i <= imax; i++) {
    spow = spow.mul(Cu, su);
    if (spow.is_zero(Cu)) break;
    unsigned e = vp_u64(C.p, i);
    uint64_t unit = i;
    for (unsigned k = 0; k < e; k++) unit /= C.p;
    Zw term = spow.divexact_p(Cu, e).mul(Cu, Zw::from_u64(Cu, unit).inv(Cu));
    acc = (i % 2 == 1) ? acc.add(Cu, term) : acc.sub(Cu, term);
  }
  unsigned prec = Mu > guard ? Mu - guard : 0;
  return PAdicInt::make(C, acc, prec);
}

PAdicInt c_of(const PadicCtx& C, int64_t u, unsigned M) {
  assert(M <= C.M);
  // g covers the plog loss at the widened modulus: imax(M+1+g) <= imax(2M+16)
  // for any plausible M, so floorlog of it is < g
  unsigned g = floorlog(C.p, log_terms(C.p, 2 * M + 16)) + 1;
  unsigned Mw = M + 1 + g;  // survive plog loss and the /p
  PadicCtx Cw = PadicCtx::make(C.p, Mw + 2);
  Zw one_unit = unit_part(Cw, u);
  PAdicInt lg = plog(Cw, PAdicInt::make(Cw, one_unit, Mw));
  assert(lg.abs_prec >= M + 1);
  PAdicInt c = lg.divexact_p(Cw, 1);
  assert(c.abs_prec >= M);
  return PAdicInt::make(C, c.v.reduce(Cw, M), M);
}

uint64_t binom_rep_u64(const PadicCtx& Cw, const Zw& x, unsigned m, const SmallRing& Rout) {
  mpz_t acc, t, q;
  mpz_inits(acc, t, q, nullptr);
  mpz_import(acc, (size_t)Cw.L, -1, sizeof(mp_limb_t), 0, 0, x.d);
  mpz_set(t, acc);
  mpz_set_ui(acc, 1);
  for (unsigned i = 0; i < m; i++) {
    mpz_mul(acc, acc, t);
    mpz_sub_ui(t, t, 1);
  }
  for (unsigned i = 2; i <= m; i++) mpz_divexact_ui(acc, acc, i);
  mpz_set_ui(q, Rout.q);
  mpz_mod(acc, acc, q);
  uint64_t lo = mpz_get_ui(acc);
  mpz_clears(acc, t, q, nullptr);
  return lo;
}

Zw binom_rep_zw(const PadicCtx& Cw, const Zw& x, unsigned m, const PadicCtx& Cout) {
  mpz_t acc, t, q;
  mpz_inits(acc, t, q, nullptr);
  mpz_import(acc, (size_t)Cw.L, -1, sizeof(mp_limb_t), 0, 0, x.d);
  mpz_set(t, acc);
  mpz_set_ui(acc, 1);
  for (unsigned i = 0; i < m; i++) {
    mpz_mul(acc, acc, t);
    mpz_sub_ui(t, t, 1);
  }
  for (unsigned i = 2; i <= m; i++) mpz_divexact_ui(acc, acc, i);
  mpz_import(q, (size_t)Cout.L, -1, sizeof(mp_limb_t), 0, 0, Cout.mod);
  mpz_mod(acc, acc, q);
  Zw r;
  size_t count = 0;
  mpz_export(r.d, &count, -1, sizeof(mp_limb_t), 0, 0, acc);
  assert((int)count <= ZQ_CAP);
  mpz_clears(acc, t, q, nullptr);
  return r;
}

TSeries universal_char(const TsRing& T, int64_t u, unsigned j) {
  const unsigned p = T.R.p, M = T.R.M, K = T.K;
  unsigned Mw = M + vp_factorial(p, K > 0 ? K - 1 : 0) + 2;
  PadicCtx Cw = PadicCtx::make(p, Mw);
  PAdicInt c = c_of(Cw, u, Mw);
  uint64_t wj;
  {
    PadicCtx CM = PadicCtx::make(p, M);
    wj = teich_pow(CM, u, j).low_u64();
  }
  TSeries out = TSeries::zero(T);
  for (unsigned m = 0; m < K; m++) {
    uint64_t bm = binom_rep_u64(Cw, c.v, m, T.R);
    out.c[m] = T.R.mul(wj, bm);
  }
  return out;
}

PAdicInt beta_center(const PadicCtx& C, unsigned k, unsigned M) {
  assert(M <= C.M);
  if (k == 0) return PAdicInt::from_u64(C, 0, M);
  PadicCtx Cw = PadicCtx::make(C.p, M + 1);
  PAdicInt e = exp_p(Cw, M + 1);
  Zw b = e.v.pow_u64(Cw, k).sub(Cw, Zw::from_u64(Cw, 1));
  return PAdicInt::make(C, b.reduce(Cw, M), M);
}

PAdicInt specialize_center(const PadicCtx& C, const TsRing& T, const TSeries& a,
                           const PAdicInt& beta) {
  unsigned prec = T.R.M < beta.abs_prec ? T.R.M : beta.abs_prec;
  if (prec > C.M) prec = C.M;
  // Horner from the top coefficient
  Zw acc = Zw::zero();
  for (unsigned m = T.K; m-- > 0;) {
    acc = acc.mul(C, beta.v).add(C, Zw::from_u64(C, a.c[m]));
  }
  return PAdicInt::make(C, acc, prec);
}

SpecVal specialize_boundary(const TsRing& T, const TSeries& a, const Rational& vbeta,
                            std::optional<unsigned> cert_opt) {
  unsigned cert = cert_opt.value_or(T.R.M);
  if (cert > T.R.M) cert = T.R.M;
  return specialize_boundary(T, a, vbeta, std::vector<unsigned>(T.K, cert));
}

SpecVal specialize_boundary(const TsRing& T, const TSeries& a, const Rational& vbeta,
                            const std::vector<unsigned>& cert_per_m) {
  assert(Rational(0) < vbeta && vbeta < Rational(1));
  assert(cert_per_m.size() >= T.K);
  bool have_known = false, tie = false;
  Rational vknown, vfloor = Rational((int64_t)T.K) * vbeta;  // T^K tail floor
  for (unsigned m = 0; m < T.K; m++) {
    unsigned cert = cert_per_m[m] > T.R.M ? T.R.M : cert_per_m[m];
    unsigned v = T.R.vp(a.c[m]);
    Rational cand = Rational((int64_t)m) * vbeta;
    if (v >= cert) {
      cand = cand + Rational((int64_t)cert);
      if (cand < vfloor) vfloor = cand;
    } else {
      cand = cand + Rational((int64_t)v);
      if (!have_known || cand < vknown) {
        vknown = cand;
        tie = false;
        have_known = true;
      } else if (cand == vknown) {
        tie = true;
      }
    }
  }
  if (!have_known) return SpecVal{vfloor, SpecVal::Kind::ATLEAST, true};
  if (vfloor <= vknown) {
    Rational v = vfloor < vknown ? vfloor : vknown;
    return SpecVal{v, SpecVal::Kind::ATLEAST, false};
  }
  return SpecVal{vknown, tie ? SpecVal::Kind::TIE : SpecVal::Kind::EXACT, false};
}

}  // namespace halo
