// U_p over the Iwasawa algebra: block assembly from the coset table, the
// Fredholm series det(1 - X U_p) on a truncated window, and the certification
// ledger that says which digits of which coefficient are real.
//
// Certification model.  The assembled infinite matrix is strictly triangular
// modulo m^J beyond its leading minor of size p*st*J/(p-1) (m = (p,T)).  So
// the S x S window with S = st*Dd pins every Fredholm coefficient mod m^J,
// J = floor(S(p-1)/(p st)): the T^t digit of c_n is stable under refinement
// to p-precision J - t.  The p-adic side is exact mod p^M on the Berkowitz
// route and loses v_p(n!) digits on the trace route (recorded per n).
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "halo/dist.hpp"
#include "halo/manin.hpp"
#include "halo/padic.hpp"

namespace halo {

struct TruncationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

unsigned certified_J(unsigned p, unsigned st, size_t S);
// smallest st-aligned window certifying m^J
size_t minor_for(unsigned p, unsigned st, unsigned J);
// configuration rule derived from the row-decay sizing N_rows = p(N_cols + J)
size_t sizing_heuristic(unsigned p, unsigned st, unsigned n_max, unsigned J);

struct UpMatrix {
  unsigned p = 3, j = 0;
  unsigned st = 0, Dd = 0;
  size_t S = 0;  // st * Dd
  TsRing T;
  std::vector<TSeries> G;  // row-major S x S
  VerdictTally assembled;  // row-estimate verdicts over all entries

  const TSeries& at(size_t r, size_t c) const { return G[r * S + c]; }
};

// Blocks P(mu) summed over the table: G[m st + i][n st + idx] += s P(m,n).
// Each block runs its decay check inside act_matrix (FAIL throws); the
// assembled matrix is re-checked against max(n - floor(r/(p st)), 0).
UpMatrix assemble_up(const TsRing& T, const UpTable& tab, unsigned j, unsigned Dd);

struct FredholmSeries {
  unsigned p = 3, j = 0;
  unsigned st = 0, Dd = 0;
  size_t S = 0;
  unsigned J = 0;
  unsigned n_max = 0;
  TsRing T;
  std::vector<TSeries> c;        // c[0..n_max], c[0] = 1
  std::vector<unsigned> pguard;  // p-digit loss per n (zero on Berkowitz route)

  // certified p-digits of the T^t coefficient of c_n
  unsigned cert(unsigned n, unsigned t) const;
};

// division-free principal-minor recursion (Berkowitz), the default route
FredholmSeries fredholm(const UpMatrix& U, unsigned n_max);
// power traces + Newton identities; exact p-power shifts, guard v_p(n!)
FredholmSeries fredholm_via_traces(const UpMatrix& U, unsigned n_max);

// lam[n] = sum_{i<n} (floor(i/st) - floor(i/(p st)))
std::vector<long> lambda_profile(unsigned p, unsigned st, unsigned n_hi);
// lambda(n_k) for n_k = p(p+1)kt, closed form (p-1)p(p+1)k^2 t / 2
long lambda_closed_form(unsigned p, unsigned t, unsigned k);

// v_p(b_{n,m}) >= lambda(n) - m for m < lambda(n), three-valued per entry
struct BoundCheck {
  size_t pass = 0, inconclusive = 0, fail = 0;
  std::vector<std::pair<unsigned, unsigned>> failures;  // (n, m)
};
BoundCheck lambda_bound_check(const FredholmSeries& F);

// refinement stability: diffs between two windows must sit outside m^min(J)
struct StabilityReport {
  bool ok = false;
  unsigned J = 0;
  std::optional<long> min_diff_val;  // smallest v_p + m over all visible diffs
  std::string note;
};
StabilityReport stability_check(const FredholmSeries& F1, const FredholmSeries& F2);

// specialization commutes with the characteristic series: charpoly of the
// beta_k-specialized window equals the specialized series.  Both sides factor
// through the same (M, K) truncation, so for k >= 1 the comparison holds to
// min(M - pguard, K v_p(beta)) digits and at k = 0 to M - pguard.
struct SpecializeReport {
  bool ok = false;
  unsigned k = 0;
  unsigned digits = 0;
  unsigned n_max = 0;
  std::string note;
};
SpecializeReport specialize_check(const UpMatrix& U, const FredholmSeries& F, unsigned k);

// scalar det(1 - X G) truncated to X^n_max, division-free
std::vector<Zw> berkowitz_fredholm_zw(const PadicCtx& C, const std::vector<Zw>& G, size_t S,
                                      size_t n_max);
std::vector<uint64_t> berkowitz_fredholm_u64(const SmallRing& R,
                                             const std::vector<uint64_t>& G, size_t S,
                                             size_t n_max);

// blocks specialized at the center of weight k before assembly, then the
// scalar Fredholm series at full multi-limb precision (the classical-window
// comparison route)
struct CenterSeries {
  unsigned p = 3, j = 0, k = 0;
  unsigned st = 0, Dd = 0;
  size_t S = 0;
  unsigned Mc = 0;  // digits carried
  unsigned J = 0;   // minor certificate against refinement
  std::vector<Zw> d;  // d[0..S]
};
CenterSeries center_fredholm(const PadicCtx& C, const UpTable& tab, unsigned j, unsigned k,
                             unsigned Dd);

// coefficients as decimal strings with their certified digit counts
std::string fredholm_json(const FredholmSeries& F);

}  // namespace halo
