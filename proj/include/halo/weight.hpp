// Weight-space plumbing: Teichmuller lifts, the p-adic logarithm, the
// universal character u -> omega(u)^j (1+T)^{c(u)} with c(u) = log(<u>)/p,
// and specialization of truncated series at weights.
//
// Precision contract: every function that divides by p or by n! either tracks
// the loss in the returned abs_prec (plog) or works internally at a widened
// modulus so the advertised digits are fully certified (exp_p, c_of,
// universal_char).  Specialization at boundary weights is valuation-only and
// three-valued: EXACT / TIE / AT-LEAST.
#pragma once

#include <cstdint>
#include <optional>

#include "halo/padic.hpp"

namespace halo {

// exp(p) = sum p^n/n! to absolute precision M, in the caller's ctx.
PAdicInt exp_p(const PadicCtx& C, unsigned M);

// Teichmuller lift: result = u mod p, result^(p-1) = 1 mod p^M.
PAdicInt teichmuller(const PadicCtx& C, int64_t u, unsigned M);

// omega(u)^j at full ctx precision (torsion part of u, then j-th power).
Zw teich_pow(const PadicCtx& C, int64_t u, unsigned j);

// 1-unit part <u> = u / omega(u) at full ctx precision.
Zw unit_part(const PadicCtx& C, int64_t u);

// log(u) for a 1-unit, with abs_prec reduced by the worst v_p(n) over the
// truncation range (documented loss, see series cutoff in the impl).
PAdicInt plog(const PadicCtx& C, const PAdicInt& u);

// c(u) = log(<u>)/p to absolute precision M (internal working ctx).
PAdicInt c_of(const PadicCtx& C, int64_t u, unsigned M);

// binom(x, m) where x is given mod p^Cw.M; exact integer binomial of the
// representative, correct mod p^(Cw.M - v_p(m!)).  Reduced into Rout.
uint64_t binom_rep_u64(const PadicCtx& Cw, const Zw& x, unsigned m, const SmallRing& Rout);
Zw binom_rep_zw(const PadicCtx& Cw, const Zw& x, unsigned m, const PadicCtx& Cout);

// omega(u)^j (1+T)^{c(u)} mod (p^M, T^K). Requires p^M < 2^63 (series layer).
TSeries universal_char(const TsRing& T, int64_t u, unsigned j);

// beta at the classical center of weight k: exp(pk) - 1, v_p = 1 for k >= 1
// prime to p.  k = 0 gives beta = 0 (T = 0).
PAdicInt beta_center(const PadicCtx& C, unsigned k, unsigned M);

struct WeightSpec {
  enum class Mode { Universal, Center, BoundaryValuation };
  Mode mode = Mode::Universal;
  unsigned j = 0;   // component: character restricted to torsion is omega^j
  PAdicInt beta;    // Center mode; v_p(beta) >= 1
  Rational vbeta;   // BoundaryValuation mode; in (0,1)

  static WeightSpec universal(unsigned j) { return WeightSpec{Mode::Universal, j, {}, {}}; }
  static WeightSpec center(unsigned j, const PAdicInt& b) {
    return WeightSpec{Mode::Center, j, b, {}};
  }
  static WeightSpec boundary(unsigned j, const Rational& v) {
    return WeightSpec{Mode::BoundaryValuation, j, {}, v};
  }
};

// Center mode: sum c_m beta^m, precision min(series M, beta prec).
PAdicInt specialize_center(const PadicCtx& C, const TsRing& T, const TSeries& a,
                           const PAdicInt& beta);

// Boundary mode: v = min_m (v_p(c_m) + m v(beta)) over the window.
//  EXACT: unique minimizer among certified coefficients, below every floor.
//  TIE: minimum attained by >= 2 certified terms (ultrametric lower bound).
//  ATLEAST: some precision/window floor is at or below the certified minimum.
struct SpecVal {
  enum class Kind { EXACT, TIE, ATLEAST };
  Rational v;
  Kind kind = Kind::ATLEAST;
  bool zero_window = false;  // no certified-nonzero coefficient at all
};
SpecVal specialize_boundary(const TsRing& T, const TSeries& a, const Rational& vbeta,
                            std::optional<unsigned> cert = {});
// per-coefficient certificates, for series whose T^m digit counts differ
SpecVal specialize_boundary(const TsRing& T, const TSeries& a, const Rational& vbeta,
                            const std::vector<unsigned>& cert_per_m);

}  // namespace halo
