#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "halo/classical.hpp"

using namespace halo;

namespace {

std::vector<Rational> rat_list(std::initializer_list<std::pair<int, int>> runs) {
  std::vector<Rational> v;
  for (auto [slope, count] : runs)
    for (int i = 0; i < count; i++) v.push_back(Rational(slope));
  return v;
}

// Leibniz charpoly of a small matrix: det(xI - M) by permutation expansion
std::vector<mpz_class> charpoly_leibniz(const ZMat& M) {
  size_t n = M.size();
  std::vector<int> perm(n);
  for (size_t i = 0; i < n; i++) perm[i] = (int)i;
  std::vector<mpz_class> acc(n + 1, 0);
  do {
    // sign of perm
    int sign = 1;
    std::vector<bool> seen(n, false);
    for (size_t i = 0; i < n; i++) {
      if (seen[i]) continue;
      int len = 0;
      for (size_t j = i; !seen[j]; j = perm[j]) {
        seen[j] = true;
        len++;
      }
      if (len % 2 == 0) sign = -sign;
    }
    // product over i of (x * [perm(i)==i] - M[i][perm(i)]) as a poly in x
    std::vector<mpz_class> term{mpz_class(sign)};
    for (size_t i = 0; i < n; i++) {
      if (perm[i] == (int)i) {
        std::vector<mpz_class> next(term.size() + 1, 0);
        for (size_t d = 0; d < term.size(); d++) {
          next[d + 1] += term[d];
          next[d] += term[d] * mpz_class(-M[i][i]);
        }
        term = std::move(next);
      } else {
        for (auto& c : term) c *= mpz_class(-M[i][perm[i]]);
      }
    }
    for (size_t d = 0; d < term.size(); d++) acc[d] += term[d];
  } while (std::next_permutation(perm.begin(), perm.end()));
  return acc;
}

Mat22 random_monoid_elt(std::mt19937_64& rng) {
  // unit upper-left, lower-left divisible by 3, small entries
  int64_t a = 1 + 3 * (int64_t)(rng() % 3);
  int64_t b = (int64_t)(rng() % 7) - 3;
  int64_t c = 3 * ((int64_t)(rng() % 5) - 2);
  int64_t d = (int64_t)(rng() % 7) - 3;
  if (a * d - b * c == 0) d += 1;
  return Mat22{a, b, c, d};
}

const ZMat kM0Level4{{0, 2, -1, 2}, {-1, 3, -1, 2}, {-1, 2, 0, 2}, {-1, 2, -1, 3}};

}  // namespace

TEST_CASE("character values and parity") {
  EpsChar triv{3, 0}, quad{3, 1};
  CHECK(triv.trivial());
  CHECK(!triv.quadratic());
  CHECK(quad.quadratic());
  CHECK(eps_value(quad, 1) == 1);
  CHECK(eps_value(quad, 2) == -1);
  CHECK(eps_value(quad, -1) == -1);
  CHECK(eps_value(quad, 7) == 1);
  CHECK(eps_value(triv, 2) == 1);
  CHECK_THROWS_AS(eps_value(quad, 6), std::invalid_argument);  // non-unit

  CHECK(parity_alive(0, triv));
  CHECK(!parity_alive(1, triv));
  CHECK(!parity_alive(0, quad));
  CHECK(parity_alive(1, quad));

  // p = 5: omega^1 has order 4, no exact model; omega^2 is the quadratic
  EpsChar ord4{5, 1}, quad5{5, 2};
  CHECK(ord4.order() == 4);
  CHECK_THROWS_AS(eps_value(ord4, 2), std::invalid_argument);
  CHECK(quad5.quadratic());
  CHECK(eps_value(quad5, 2) == -1);
  CHECK(eps_value(quad5, 4) == 1);
}

TEST_CASE("dual action: identity, k=1 block, contravariance") {
  EpsChar triv{3, 0}, quad{3, 1};
  for (int k = 0; k <= 3; k++) {
    ZMat T = dual_action(MAT_ID, k, triv);
    for (int r = 0; r <= k; r++)
      for (int c = 0; c <= k; c++) CHECK(T[r][c] == (r == c ? 1 : 0));
  }

  Mat22 mu{1, 2, 3, 7};
  ZMat T1 = dual_action(mu, 1, triv);
  CHECK(T1 == ZMat{{1, 3}, {2, 7}});  // [[A, C], [B, D]]
  ZMat T1q = dual_action(Mat22{2, 1, 3, 2}, 1, quad);
  CHECK(T1q == ZMat{{-2, -3}, {-1, -2}});  // omega(2) = -1 scales the block

  // k=0 twisted entries are the character values themselves
  CHECK(dual_action(Mat22{2, 0, 0, 1}, 0, quad) == ZMat{{-1}});
  CHECK(dual_action(Mat22{4, 0, 3, 1}, 0, quad) == ZMat{{1}});

  // psi||(g1 g2) = (psi||g1)||g2: T(g1 g2) = T(g2) T(g1)
  std::mt19937_64 rng(7);
  for (int it = 0; it < 50; it++) {
    Mat22 g1 = random_monoid_elt(rng), g2 = random_monoid_elt(rng);
    for (int k : {0, 1, 2, 3}) {
      for (EpsChar eps : {triv, quad}) {
        ZMat lhs = dual_action(mmul(g1, g2), k, eps);
        ZMat rhs = zmat_mul(dual_action(g2, k, eps), dual_action(g1, k, eps));
        CHECK(lhs == rhs);
      }
    }
  }

  CHECK_THROWS_AS(dual_action(Mat22{1, 0, 1, 1}, 1, quad), std::invalid_argument);
}

TEST_CASE("charpoly: pinned, cross-checked, modular consistency") {
  std::vector<mpz_class> cp = charpoly_exact(kM0Level4);
  std::vector<mpz_class> want{3, -10, 12, -6, 1};
  CHECK(cp == want);

  // independent Leibniz expansion on random 5x5 matrices
  std::mt19937_64 rng(11);
  for (int it = 0; it < 10; it++) {
    ZMat M(5, std::vector<int64_t>(5));
    for (auto& row : M)
      for (auto& x : row) x = (int64_t)(rng() % 41) - 20;
    CHECK(charpoly_exact(M) == charpoly_leibniz(M));
  }

  // charpoly_mod agrees with the exact result reduced mod q
  uint64_t q = 2305843009213693951ull;  // 2^61 - 1
  std::vector<uint64_t> cm = charpoly_mod(kM0Level4, q);
  for (size_t i = 0; i < cp.size(); i++) {
    mpz_class r = cp[i] % mpz_class((unsigned long)q);
    if (r < 0) r += mpz_class((unsigned long)q);
    CHECK(cm[i] == r.get_ui());
  }
}

TEST_CASE("newton slopes of eigenvalue lists") {
  ZMat diag{{1, 0, 0}, {0, 3, 0}, {0, 0, 9}};
  auto sl = up_slopes(diag, 3);
  REQUIRE(sl.size() == 3);
  CHECK(sl[0] == Rational(0));
  CHECK(sl[1] == Rational(1));
  CHECK(sl[2] == Rational(2));

  ZMat id3{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  CHECK(up_slopes(id3, 3) == rat_list({{0, 3}}));

  // singular matrix drops the zero eigenvalues from the list
  ZMat sing{{0, 0}, {0, 3}};
  CHECK(up_slopes(sing, 3) == rat_list({{1, 1}}));

  // non-integral slope
  ZMat frac{{0, 1}, {3, 0}};  // x^2 - 3: slopes 1/2, 1/2
  auto fs = up_slopes(frac, 3);
  REQUIRE(fs.size() == 2);
  CHECK(fs[0] == Rational(1, 2));
  CHECK(fs[1] == Rational(1, 2));
}

TEST_CASE("classical spaces at the small level (l = 2)") {
  EpsChar triv{3, 0}, quad{3, 1};

  ClassicalSpace S0 = classical_up(3, 2, 0, triv);
  CHECK(S0.st == 4);
  CHECK(S0.dim == 4);
  CHECK(S0.up == kM0Level4);
  CHECK(zmat_trace(S0.up) == 6);
  CHECK(up_slopes(S0.up, 3) == rat_list({{0, 3}, {1, 1}}));

  ClassicalSpace S1 = classical_up(3, 2, 1, quad);
  CHECK(S1.dim == 8);
  CHECK(zmat_trace(S1.up) == 24);
  std::vector<mpz_class> cp = charpoly_exact(S1.up);
  CHECK(cp[0] == 6561);  // det = 3^8
  CHECK(up_slopes(S1.up, 3) == rat_list({{0, 3}, {1, 2}, {2, 3}}));

  CHECK(classical_up(3, 2, 1, triv).dim == 0);
  CHECK(classical_up(3, 2, 0, quad).dim == 0);
  CHECK_THROWS_AS(classical_up(3, 2, 0, triv, 2), std::invalid_argument);
}

TEST_CASE("reference level l = 11: dimensions, traces, slopes") {
  EpsChar triv{3, 0}, quad{3, 1};

  ClassicalSpace S0 = classical_up(3, 11, 0, triv);
  CHECK(S0.st == 88);
  CHECK(S0.dim == 88);
  CHECK(zmat_trace(S0.up) == 0);
  CHECK(up_slopes(S0.up, 3) == rat_list({{0, 66}, {1, 22}}));

  ClassicalSpace S1 = classical_up(3, 11, 1, quad);
  CHECK(S1.dim == 176);
  CHECK(zmat_trace(S1.up) == 24);
  std::vector<mpz_class> cp = charpoly_exact(S1.up);
  CHECK(cp[176] == 1);
  mpz_class det;
  mpz_ui_pow_ui(det.get_mpz_t(), 3, 176);
  CHECK(cp[0] == det);
  CHECK(up_slopes(S1.up, 3) == rat_list({{0, 66}, {1, 44}, {2, 66}}));

  CHECK(classical_up(3, 11, 1, triv).dim == 0);
  CHECK(classical_up(3, 11, 0, quad).dim == 0);
}

TEST_CASE("Hecke commutators separate live twists from the dead one") {
  EpsChar triv{3, 0}, quad{3, 1};

  // l = 2: T_5 probes (dets coprime to N l = 12)
  {
    Domain D = build_domain(4);
    free_generators(D);
    UpTable up = up_table(D, 3);
    std::vector<Mat22> t5;
    for (int64_t a = 0; a < 5; a++) t5.push_back(Mat22{1, a, 0, 5});
    t5.push_back(Mat22{5, 0, 0, 1});
    UpTable hk = hecke_table(D, 3, t5);
    int st = 4;

    ZMat U0 = mat_from_table(up, st, 0, triv), H0 = mat_from_table(hk, st, 0, triv);
    CHECK(zmat_mul(U0, H0) == zmat_mul(H0, U0));

    ZMat U1 = mat_from_table(up, st, 1, quad), H1 = mat_from_table(hk, st, 1, quad);
    CHECK(zmat_mul(U1, H1) == zmat_mul(H1, U1));

    // the parity-dead twist is not a Hecke module: the naive matrix shows it
    ZMat U0w = mat_from_table(up, st, 0, quad), H0w = mat_from_table(hk, st, 0, quad);
    CHECK(zmat_trace(U0w) == 2);
    CHECK(charpoly_exact(U0w) == std::vector<mpz_class>{-3, -2, -2, -2, 1});
    CHECK(zmat_mul(U0w, H0w) != zmat_mul(H0w, U0w));

    // T_2 exits the allowed cusp set at l = 2
    std::vector<Mat22> t2{Mat22{1, 0, 0, 2}, Mat22{1, 1, 0, 2}, Mat22{2, 0, 0, 1}};
    CHECK_THROWS_AS(hecke_table(D, 3, t2), SupportError);
  }

  // l = 11: T_2 probes
  {
    Domain D = build_domain(121);
    free_generators(D);
    UpTable up = up_table(D, 3);
    std::vector<Mat22> t2{Mat22{1, 0, 0, 2}, Mat22{1, 1, 0, 2}, Mat22{2, 0, 0, 1}};
    UpTable hk = hecke_table(D, 3, t2);
    int st = 88;

    ZMat U0 = mat_from_table(up, st, 0, triv), H0 = mat_from_table(hk, st, 0, triv);
    CHECK(zmat_mul(U0, H0) == zmat_mul(H0, U0));
    ZMat U1 = mat_from_table(up, st, 1, quad), H1 = mat_from_table(hk, st, 1, quad);
    CHECK(zmat_mul(U1, H1) == zmat_mul(H1, U1));
    ZMat U0w = mat_from_table(up, st, 0, quad), H0w = mat_from_table(hk, st, 0, quad);
    CHECK(zmat_trace(U0w) == 2);
    CHECK(zmat_mul(U0w, H0w) != zmat_mul(H0w, U0w));
  }
}

TEST_CASE("Atkin-Lehner pairing") {
  EpsChar triv{3, 0}, quad{3, 1};

  ALReport r1 = atkin_lehner_check(3, 11, 1, quad);
  CHECK(r1.status == ALReport::Status::OK);
  CHECK(r1.dim == 176);
  REQUIRE(r1.slopes_eps.size() == 176);
  for (int i = 0; i < 176; i++)
    CHECK(r1.slopes_eps[i] + r1.slopes_eps_inv[175 - i] == Rational(2));

  ALReport r2 = atkin_lehner_check(3, 2, 1, quad);
  CHECK(r2.status == ALReport::Status::OK);
  CHECK(r2.dim == 8);

  // parity-dead instance: vacuous, not a failure
  ALReport r3 = atkin_lehner_check(3, 11, 0, quad);
  CHECK(r3.status == ALReport::Status::VACUOUS);
  CHECK(r3.dim == 0);

  CHECK_THROWS_AS(atkin_lehner_check(3, 11, 0, triv), std::invalid_argument);
  CHECK_THROWS_AS(atkin_lehner_check(3, 11, -1, quad), std::invalid_argument);
}

TEST_CASE("control comparison, classical side") {
  ControlReport c0 = control_check(3, 11, 0, rat_list({{0, 66}}));
  CHECK(c0.ok);
  CHECK(c0.classical_small == rat_list({{0, 66}}));

  ControlReport c1 = control_check(3, 11, 1, rat_list({{0, 66}, {1, 44}}));
  CHECK(c1.ok);
  CHECK(c1.classical_small.size() == 110);

  ControlReport bad = control_check(3, 11, 0, rat_list({{0, 65}}));
  CHECK(!bad.ok);
}
