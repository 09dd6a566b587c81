// Fundamental domains for Gamma_0(N) in the strip 0 <= Re z <= 1, boundary
// pairing, free generators of the partial modular symbol space, and the
// divisor -> group-word solver.
//
// Domains are built by greedy triangle gluing with backtracking, seeded at the
// base triangle R = (0, inf, 1); correctness is established post hoc by the
// checks (coset bijection, closed boundary, fixed-point-free pairing, Manin
// relation), not trusted from the search.
//
// Partial symbols live on divisors supported away from Gamma_0(N)*inf; every
// solver entry point refuses support in that orbit (SupportError).  Levels
// with 2- or 3-torsion are refused by UnsupportedLevel.
#pragma once

#include <array>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "halo/matrix22.hpp"

namespace halo {

struct UnsupportedLevel : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SupportError : std::domain_error {
  using std::domain_error::domain_error;
};

// unordered cusp pair: the geodesic underlying an oriented edge
using GeoKey = std::pair<Cusp, Cusp>;
inline GeoKey geo_key(const Mat22& e) {
  Cusp x = path_from(e), y = path_to(e);
  return x < y ? GeoKey{x, y} : GeoKey{y, x};
}

struct Domain {
  int64_t N = 0;
  int mu = 0;                // |P^1(Z/N)|
  std::vector<Mat22> tris;   // triangle labels g (triangle gR), normalized
  std::map<P1Key, Mat22> E;  // coset label -> canonical oriented edge
  std::vector<Mat22> boundary;
  std::map<Mat22, Mat22> pair;        // boundary involution e <-> e*
  std::map<Mat22, Mat22> pair_gamma;  // gamma_e * e* = reverse(e)
  std::vector<Mat22> gens;            // free generators e_1..e_t
  std::map<Mat22, int> gen_index;
  Mat22 e_left{}, e_right{};  // the infinity pair: 0->inf and inf->1
  int t = 0;
  // dual tree of the triangulated disk, for the arc solver
  std::vector<std::array<Mat22, 3>> tri_edges;
  std::map<GeoKey, std::vector<int>> geo;
  std::map<Mat22, int> tri_of_edge;
  bool finished = false;
};

std::vector<Mat22> coset_reps(int64_t N);
Domain build_domain(int64_t N);  // triangles + E + boundary
// pairing, generators, dual tree; throws UnsupportedLevel on 2-torsion
void finish_domain(Domain& D);
// Sum over representative pairs of (1 - gamma_i^{-1})[e_i] == 0 as a divisor
bool manin_relation_check(const Domain& D);
// finish_domain + vertex check: no domain vertex except inf lies in the
// Gamma_0(N) orbit of inf (so all generators carry honest partial symbols)
std::vector<Mat22> free_generators(Domain& D);

// h (det +-1) = gamma * rep with rep in E, gamma in Gamma_0(N); both mod +-1
std::pair<Mat22, Mat22> reduce_to_E(const Domain& D, Mat22 h);

// unimodular chain telescoping from -> to via continued-fraction convergents
std::vector<Mat22> cf_decompose(const Cusp& from, const Cusp& to);

struct WordTerm {
  Mat22 g;
  int s = 1;  // sign
  int i = 0;  // generator index
  bool operator==(const WordTerm&) const = default;
};
using Word = std::vector<WordTerm>;
using Divisor = std::map<Cusp, int>;  // cusp -> multiplicity, degree 0

Word express_E(const Domain& D, Mat22 e);
Word express_int_path(const Domain& D, int64_t m);       // {1} - {m}
Word express_path(const Domain& D, Cusp x, Cusp y);      // {x} - {y}
Word express_divisor(const Domain& D, const Divisor& d);
Divisor eval_word(const Domain& D, const Word& w, const std::vector<Mat22>* lift = nullptr);

// level raising N -> Np: right cosets eta_0..eta_{p-1}, eta_inf
std::vector<Mat22> build_etas(int64_t N, unsigned p);
// factor g = delta * eta_j, delta in Gamma_0(Np); remap index i -> j*t + i
WordTerm lift_term(const WordTerm& term, const std::vector<Mat22>& etas, int64_t Np, int t);

struct UpTerm {
  Mat22 mu;  // det p (or det q for general Hecke), monoid normalized
  int s = 1;
  int idx = 0;
  bool operator==(const UpTerm&) const = default;
};
using UpTable = std::vector<std::vector<UpTerm>>;

// U_p on the st = (p+1)t tilde generators: table[i] decomposes the p shifts
// gamma_a * etilde_i, each mu in the monoid (unit, *; p*, p*)
UpTable up_table(const Domain& D, unsigned p);
// same decomposition for arbitrary det-q coset reps (Hecke probes)
UpTable hecke_table(const Domain& D, unsigned p, const std::vector<Mat22>& reps);

}  // namespace halo
