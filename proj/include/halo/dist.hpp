// Mahler-basis matrices of the monoid action on the integral distribution
// module.  For gamma = (a b; c d) with a a p-adic unit, c = 0 mod p, det != 0,
// the action on the duals delta^{[n]} has matrix
//
//   P_{m,n} = Delta^n g_m(0),   g_m(z) = chi(a+cz) binom((b+dz)/(a+cz), m),
//
// the transpose of the function-side matrix.  Entries are computed by
// sampling g_m at z = 0..cols-1 and finite differencing; Mahler coefficients
// at integer points are exact, so the only precision loss is v_p(m!) from the
// binomial of a residue representative, absorbed by an internally widened
// working modulus.  Every exported entry is fully certified mod p^M.
#pragma once

#include <stdexcept>
#include <vector>

#include "halo/matrix22.hpp"
#include "halo/padic.hpp"

namespace halo {

struct MonoidError : std::domain_error {
  using std::domain_error::domain_error;
};

// three-valued at the (M,K) window: FAIL only on a certified violation
enum class Verdict { PASS, INCONCLUSIVE, FAIL };

// Sigma_0(p): a a unit, c = 0 mod p, det != 0.  The action is defined here.
bool in_sigma0(unsigned p, const Mat22& g);
// U_p-coset type: additionally d = 0 mod p.  The sharper decay bound needs it.
bool in_lower_monoid(unsigned p, const Mat22& g);

struct ActMatrix {
  Mat22 gamma{};
  unsigned j = 0;  // torsion component: chi restricted to mu_{p-1} is omega^j
  unsigned rows = 0, cols = 0;
  unsigned guard = 0;  // digits the working modulus carried above M
  std::vector<TSeries> P;         // row-major, P[m*cols + n]
  std::vector<Verdict> verdicts;  // decay verdict per entry, same layout

  const TSeries& at(unsigned m, unsigned n) const { return P[(size_t)m * cols + n]; }
  Verdict verdict(unsigned m, unsigned n) const { return verdicts[(size_t)m * cols + n]; }
};

// Mahler coefficients Delta^q g_n(0), q = 0..max_order, of the image of the
// n-th basis function (column n of the function-side matrix, row n of P).
std::vector<TSeries> act_on_basis(const TsRing& T, const Mat22& g, unsigned j, unsigned n,
                                  unsigned max_order);

// Decay bound for entry (m, n): max(n - m, 0) on Sigma_0(p), sharpened to
// max(n - floor(m/p), 0) when p | d.
long decay_bound(unsigned p, const Mat22& g, unsigned m, unsigned n);
Verdict bound_verdict(const MVal& mv, long bound);

// Full block with per-entry decay verdicts.  A FAIL verdict throws
// std::logic_error: the bound is a theorem, so a certified violation means
// the action convention is wrong.
ActMatrix act_matrix(const TsRing& T, const Mat22& g, unsigned j, unsigned rows,
                     unsigned cols);

struct VerdictTally {
  size_t pass = 0, inconclusive = 0, fail = 0;
};
VerdictTally tally(const std::vector<Verdict>& vs);

// Scalar block at the classical center of weight k: chi(u) = omega^j(u)<u>^k.
// Row-major rows x cols over C's residue ring, fully certified at C.M.
std::vector<Zw> act_matrix_center(const PadicCtx& C, const Mat22& g, unsigned j, unsigned k,
                                  unsigned rows, unsigned cols);

// Truncation sizing: retaining this many rows certifies Fredholm coefficients
// built from `cols` columns mod m^J (effective form of the decay bound).
inline unsigned rows_for(unsigned p, unsigned cols, unsigned J) { return p * (cols + J); }

}  // namespace halo
