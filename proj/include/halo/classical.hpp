// Exact finite-dimensional oracle: U_p on V^k-valued partial symbols at level
// Np, characteristic polynomials over Z, Newton slopes, the Atkin-Lehner slope
// pairing, and the classical side of the control-theorem comparison.
//
// Everything here is exact integer/rational arithmetic; there is no precision
// to track. Characters are the exact-mode ones only (trivial and quadratic);
// their values are +-1, so the matrices stay over Z.
#pragma once

#include <gmpxx.h>

#include <numeric>
#include <string>
#include <vector>

#include "halo/manin.hpp"
#include "halo/padic.hpp"

namespace halo {

using ZMat = std::vector<std::vector<int64_t>>;

// character omega^e of (Z/p)^x by exponent on the Teichmueller generator;
// exact mode handles order <= 2 only (values +-1), anything else is refused
struct EpsChar {
  unsigned p = 3;
  int e = 0;
  int order() const {
    int m = (int)(p - 1);
    int r = ((e % m) + m) % m;
    return m / std::gcd(r, m);
  }
  bool trivial() const { return order() == 1; }
  bool quadratic() const { return order() == 2; }
};

int eps_value(const EpsChar& eps, int64_t a);  // +-1, a must be a unit mod p
// chi(-id) = (-1)^k eps(-1); the symbol space vanishes when this is -1
bool parity_alive(int k, const EpsChar& eps);

// (k+1) x (k+1) matrix of mu on the moment (dual) basis of {1, z, ..., z^k}:
// row r holds the coefficients of the image of z^r, scaled by eps(a).
// Quadratic eps requires mu in the level-p monoid (c = 0 mod p, a unit).
ZMat dual_action(const Mat22& mu, int k, const EpsChar& eps);

// assemble the st(k+1)-square matrix of a coset table on V^(k,eps) blocks
ZMat mat_from_table(const UpTable& tab, int st, int k, const EpsChar& eps);

ZMat zmat_mul(const ZMat& A, const ZMat& B);
int64_t zmat_trace(const ZMat& A);

struct ClassicalSpace {
  int64_t N = 0;
  unsigned p = 0;
  int k = 0;
  EpsChar eps;
  int st = 0;
  int dim = 0;  // st(k+1), or 0 when chi(-1) = -1
  ZMat up;      // empty when dim == 0
};
// U_p on Symb_{Gamma_0(l^2 p), C}(V^(k,eps)); m = 1 only
ClassicalSpace classical_up(unsigned p, int64_t l, int k, const EpsChar& eps, int m = 1);

// monic charpoly det(xI - M) over Z via CRT of Hessenberg reductions mod
// 61-bit primes, with a Hadamard coefficient bound; coeffs[i] multiplies x^i
std::vector<mpz_class> charpoly_exact(const ZMat& M);
std::vector<uint64_t> charpoly_mod(const ZMat& M, uint64_t q);

// lower-hull slopes of (i, v_p(c_i)), ascending with multiplicity; entries
// with c_i = 0 contribute no point (infinite slopes are simply absent)
std::vector<Rational> newton_slopes(const std::vector<mpz_class>& coeffs, unsigned p);
// valuations of the nonzero U_p eigenvalues: slopes of the reversed charpoly
std::vector<Rational> up_slopes(const ZMat& M, unsigned p);

struct ALReport {
  enum class Status { OK, FAIL, VACUOUS } status = Status::FAIL;
  int dim = 0;
  std::vector<Rational> slopes_eps;      // ascending
  std::vector<Rational> slopes_eps_inv;  // ascending
  std::string note;
};
// slope pairing at level Np: a_i + b_{d-1-i} = k+1 between the eps and
// eps^{-1} spaces (exact-mode eps is self-inverse, so both lists coincide);
// also validates the W matrix itself: two Euclid choices, C preserved, W^2
// scalar. Parity-dead (k, eps) reports VACUOUS, not FAIL.
ALReport atkin_lehner_check(unsigned p, int64_t l, int k, const EpsChar& eps);

struct ControlReport {
  bool ok = false;
  int k = 0;
  std::vector<Rational> classical_small;  // classical slopes < k+1, ascending
  std::string note;
};
// classical side of the small-slope comparison at weight z -> <z>^k: the
// matching classical space is (k, omega^{-k}) since the Teichmueller part of
// z^k is peeled off on the overconvergent side. Caller supplies the
// overconvergent slopes < k+1; equality is exact multiset equality.
ControlReport control_check(unsigned p, int64_t l, int k,
                            const std::vector<Rational>& overconvergent_small);

}  // namespace halo
