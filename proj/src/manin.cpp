#include "halo/manin.hpp"

#include <algorithm>
#include <cassert>
#include <deque>

namespace halo {

namespace {

std::array<Mat22, 3> clockwise_edges(const Mat22& g) {
  return {g, mmul(g, MAT_TAU), mmul(g, MAT_TAU2)};
}

std::array<P1Key, 3> tri_keys(const Mat22& g, int64_t N) {
  return {coset_key(g, N), coset_key(mmul(g, MAT_TAU), N), coset_key(mmul(g, MAT_TAU2), N)};
}

// all triangle vertices stay in [0,1] union {inf}
bool vert_ok(const Mat22& g) {
  const Cusp vs[3] = {cusp_of(g.b, g.d), cusp_of(g.a, g.c),
                      cusp_of(g.a + g.b, g.c + g.d)};
  for (const Cusp& v : vs) {
    if (v.den == 0) continue;
    if (v.num < 0 || v.num > v.den) return false;
  }
  return true;
}

// boundary = oriented edges whose geodesic occurs exactly once, in first-seen order
std::vector<Mat22> boundary_edges(const std::vector<Mat22>& tris) {
  std::vector<GeoKey> order;
  std::map<GeoKey, std::vector<Mat22>> cnt;
  for (const Mat22& g : tris) {
    for (const Mat22& e : clockwise_edges(g)) {
      GeoKey k = geo_key(e);
      auto [it, fresh] = cnt.try_emplace(k);
      if (fresh) order.push_back(k);
      it->second.push_back(e);
    }
  }
  std::vector<Mat22> out;
  for (const GeoKey& k : order) {
    if (cnt[k].size() == 1) out.push_back(cnt[k][0]);
  }
  return out;
}

struct DomainSearch {
  int64_t N;
  int target;
  std::set<P1Key> used;
  std::vector<Mat22> tris;

  bool place(const Mat22& g) {
    auto ks = tri_keys(g, N);
    assert(ks[0] != ks[1] && ks[1] != ks[2] && ks[0] != ks[2]);
    for (const P1Key& k : ks)
      if (used.count(k)) return false;
    for (const P1Key& k : ks) used.insert(k);
    tris.push_back(g);
    return true;
  }

  void unplace(const Mat22& g) {
    for (const P1Key& k : tri_keys(g, N)) used.erase(k);
    tris.pop_back();
  }

  bool dfs() {
    if ((int)tris.size() == target) return true;
    std::vector<std::pair<int64_t, Mat22>> cands;
    for (const Mat22& e : boundary_edges(tris)) {
      Mat22 g2 = normalize_pm(mmul(e, MAT_SIGMA));
      if (!vert_ok(g2)) continue;
      auto ks = tri_keys(g2, N);
      if (ks[0] == ks[1] || ks[1] == ks[2] || ks[0] == ks[2]) continue;
      bool clash = false;
      for (const P1Key& k : ks)
        if (used.count(k)) clash = true;
      if (clash) continue;
      int64_t w = std::abs(g2.c) + std::abs(g2.d) + std::abs(g2.c + g2.d);
      cands.emplace_back(w, g2);
    }
    std::sort(cands.begin(), cands.end());
    for (auto& [w, g2] : cands) {
      if (!place(g2)) continue;
      if (dfs()) return true;
      unplace(g2);
    }
    return false;
  }
};

}  // namespace

std::vector<Mat22> coset_reps(int64_t N) {
  if (N == 1) return {MAT_ID};  // single coset; the domain route needs torsion-free N
  Domain D = build_domain(N);
  std::vector<Mat22> reps;
  for (const auto& [k, e] : D.E) reps.push_back(e);
  return reps;
}

Domain build_domain(int64_t N) {
  std::set<P1Key> keys;
  for (int64_t c = 0; c < N; c++) {
    for (int64_t d = 0; d < N; d++) {
      if (std::gcd(std::gcd(c, d), N) == 1) keys.insert(p1_key(c, d, N));
    }
  }
  if (N == 1) keys = {P1Key{0, 0}};
  int mu = (int)keys.size();
  if (mu % 3 != 0) throw UnsupportedLevel("3-torsion at level " + std::to_string(N));

  DomainSearch S{N, mu / 3, {}, {}};
  bool seeded = S.place(MAT_ID);
  assert(seeded);
  (void)seeded;
  if (!S.dfs()) throw UnsupportedLevel("domain search failed for N=" + std::to_string(N));

  Domain D;
  D.N = N;
  D.mu = mu;
  for (const Mat22& g : S.tris) D.tris.push_back(normalize_pm(g));
  for (const Mat22& g : D.tris) {
    for (const Mat22& e0 : clockwise_edges(g)) {
      Mat22 e = normalize_pm(e0);
      P1Key k = coset_key(e, N);
      auto [it, fresh] = D.E.try_emplace(k, e);
      assert(fresh && "coset label hit twice");
      (void)it;
      (void)fresh;
    }
  }
  assert((int)D.E.size() == mu);
  for (const Mat22& e : boundary_edges(D.tris)) D.boundary.push_back(normalize_pm(e));
  return D;
}

std::pair<Mat22, Mat22> reduce_to_E(const Domain& D, Mat22 h) {
  if (mdet(h) == -1) h = Mat22{h.a, -h.b, h.c, -h.d};  // same oriented path, det +1
  assert(mdet(h) == 1);
  auto it = D.E.find(coset_key(h, D.N));
  assert(it != D.E.end());
  const Mat22& rep = it->second;
  Mat22 gam = mmul(h, minv(rep));
  assert(coset_key(gam, D.N) == p1_key(0, 1, D.N) && "reduction left the group");
  assert(normalize_pm(mmul(gam, rep)) == normalize_pm(h));
  return {rep, normalize_pm(gam)};
}

void finish_domain(Domain& D) {
  std::set<Mat22> bset(D.boundary.begin(), D.boundary.end());
  for (const Mat22& e0 : D.boundary) {
    Mat22 e = normalize_pm(e0);
    Mat22 rev = mmul(e, MAT_SIGMA);
    auto [rep, gam] = reduce_to_E(D, rev);
    assert(bset.count(normalize_pm(rep)) && "pair is not a boundary edge");
    D.pair[e] = normalize_pm(rep);
    D.pair_gamma[e] = gam;
  }
  for (const auto& [e, es] : D.pair) {
    assert(D.pair.at(es) == e && "pairing is not an involution");
    if (es == e) throw UnsupportedLevel("2-torsion: boundary pairing fixed point");
  }

  std::vector<Mat22> inf_edges;
  for (const Mat22& e : D.boundary) {
    if (path_from(e) == Cusp{1, 0} || path_to(e) == Cusp{1, 0}) inf_edges.push_back(e);
  }
  assert(inf_edges.size() == 2 && "domain must touch infinity along one pair");
  D.e_left = normalize_pm(MAT_ID);
  D.e_right = normalize_pm(MAT_TAU2);
  assert((std::set<Mat22>{inf_edges[0], inf_edges[1]} ==
          std::set<Mat22>{D.e_left, D.e_right}));
  assert(D.pair.at(D.e_right) == D.e_left);

  std::set<std::pair<Mat22, Mat22>> pairs;
  for (const Mat22& e0 : D.boundary) {
    Mat22 e = normalize_pm(e0);
    if (e == D.e_left || e == D.e_right) continue;
    Mat22 es = D.pair.at(e);
    pairs.insert(e < es ? std::pair{e, es} : std::pair{es, e});
  }
  D.gens.clear();
  for (const auto& pr : pairs) D.gens.push_back(pr.first);
  std::sort(D.gens.begin(), D.gens.end());
  for (int i = 0; i < (int)D.gens.size(); i++) D.gen_index[D.gens[i]] = i;
  D.t = (int)D.gens.size();

  D.tri_edges.clear();
  D.geo.clear();
  D.tri_of_edge.clear();
  for (int ti = 0; ti < (int)D.tris.size(); ti++) {
    std::array<Mat22, 3> es;
    auto raw = clockwise_edges(D.tris[ti]);
    for (int k = 0; k < 3; k++) es[k] = normalize_pm(raw[k]);
    D.tri_edges.push_back(es);
    for (const Mat22& e : es) {
      D.geo[geo_key(e)].push_back(ti);
      D.tri_of_edge[e] = ti;
    }
  }
  D.finished = true;
}

bool manin_relation_check(const Domain& D) {
  assert(D.finished);
  Divisor acc;
  auto add = [&acc](const Cusp& c, int m) {
    acc[c] += m;
    if (acc[c] == 0) acc.erase(c);
  };
  std::vector<Mat22> reps{D.e_right};
  reps.insert(reps.end(), D.gens.begin(), D.gens.end());
  for (const Mat22& e : reps) {
    Mat22 gi = minv(D.pair_gamma.at(e));
    add(path_to(e), 1);
    add(path_from(e), -1);
    Mat22 ge = mmul(gi, e);
    add(path_to(ge), -1);
    add(path_from(ge), 1);
  }
  return acc.empty();
}

std::vector<Mat22> free_generators(Domain& D) {
  if (!D.finished) finish_domain(D);
  // Lemma check: the only domain vertex in the infinity orbit is infinity
  for (const Mat22& g : D.tris) {
    const Cusp vs[3] = {cusp_of(g.b, g.d), cusp_of(g.a, g.c),
                        cusp_of(g.a + g.b, g.c + g.d)};
    for (const Cusp& v : vs) {
      if (cusp_in_inf_orbit(v, D.N) && !(v == Cusp{1, 0}))
        throw UnsupportedLevel("domain vertex in the infinity orbit");
    }
  }
  if (!manin_relation_check(D)) throw UnsupportedLevel("Manin relation failed");
  return D.gens;
}

std::vector<Mat22> cf_decompose(const Cusp& from, const Cusp& to) {
  auto chain_from_inf = [](const Cusp& c) {
    std::vector<Mat22> out;
    if (c.den == 0) return out;
    std::vector<int64_t> cf;
    int64_t a = c.num, b = c.den;
    while (b) {
      int64_t q = a >= 0 ? a / b : -((-a + b - 1) / b);  // floor division
      cf.push_back(q);
      int64_t r = a - q * b;
      a = b;
      b = r;
    }
    std::vector<int64_t> ps{1, cf[0]}, qs{0, 1};
    for (size_t k = 1; k < cf.size(); k++) {
      ps.push_back(checked_add(checked_mul(cf[k], ps.back()), ps[ps.size() - 2]));
      qs.push_back(checked_add(checked_mul(cf[k], qs.back()), qs[qs.size() - 2]));
    }
    for (size_t k = 1; k < ps.size(); k++) {
      Mat22 m{ps[k], ps[k - 1], qs[k], qs[k - 1]};
      int64_t det = mdet(m);
      assert(det == 1 || det == -1);
      if (det == -1) m = Mat22{m.a, -m.b, m.c, -m.d};
      out.push_back(m);  // path from p_{k-1}/q_{k-1} to p_k/q_k
    }
    return out;
  };
  std::vector<Mat22> A = chain_from_inf(from), B = chain_from_inf(to);
  size_t i = 0;
  while (i < A.size() && i < B.size() && A[i] == B[i]) i++;
  std::vector<Mat22> out;
  for (size_t k = A.size(); k-- > i;) out.push_back(normalize_pm(mmul(A[k], MAT_SIGMA)));
  for (size_t k = i; k < B.size(); k++) out.push_back(normalize_pm(B[k]));
  Cusp cur = from;
  for (const Mat22& m : out) {
    assert(path_from(m) == cur);
    cur = path_to(m);
  }
  assert(cur == to);
  return out;
}

Word express_E(const Domain& D, Mat22 e) {
  assert(D.finished);
  e = normalize_pm(e);
  if (D.pair.count(e)) {
    assert(!(e == D.e_left) && !(e == D.e_right) && "infinity edge reached express_E");
    auto gi = D.gen_index.find(e);
    if (gi != D.gen_index.end()) return {WordTerm{MAT_ID, +1, gi->second}};
    Mat22 g = D.pair.at(e);  // the generator edge this one is paired with
    auto gj = D.gen_index.find(g);
    assert(gj != D.gen_index.end());
    Mat22 gam = D.pair_gamma.at(g);  // gam * e = reverse(g)
    return {WordTerm{minv(gam), -1, gj->second}};
  }
  // interior: split the dual tree at this geodesic, expand over the far side
  GeoKey key = geo_key(e);
  auto git = D.geo.find(key);
  assert(git != D.geo.end() && git->second.size() == 2);
  const std::vector<int>& tis = git->second;
  auto component = [&D](int start, const GeoKey& banned) {
    std::set<int> seen{start};
    std::deque<int> dq{start};
    while (!dq.empty()) {
      int ti = dq.front();
      dq.pop_front();
      for (const Mat22& e2 : D.tri_edges[ti]) {
        GeoKey k2 = geo_key(e2);
        if (k2 == banned) continue;
        auto it2 = D.geo.find(k2);
        if (it2 == D.geo.end() || it2->second.size() != 2) continue;
        for (int tj : it2->second) {
          if (!seen.count(tj)) {
            seen.insert(tj);
            dq.push_back(tj);
          }
        }
      }
    }
    return seen;
  };
  auto tit = D.tri_of_edge.find(e);
  assert(tit != D.tri_of_edge.end());
  int t_right = tit->second;
  std::set<int> comp_right = component(t_right, key);
  std::set<int> arc_tris;
  int sign;
  if (!comp_right.count(0)) {
    arc_tris = std::move(comp_right);
    sign = -1;
  } else {
    int other = tis[0] == t_right ? tis[1] : tis[0];
    arc_tris = component(other, key);
    sign = +1;
  }
  Word word;
  for (int ti : arc_tris) {
    for (const Mat22& b : D.tri_edges[ti]) {
      if (D.pair.count(b)) {
        assert(!(b == D.e_left) && !(b == D.e_right) && "infinity edge in arc");
        for (const WordTerm& w : express_E(D, b)) word.push_back({w.g, sign * w.s, w.i});
      }
    }
  }
  return word;
}

namespace {

Word word_scale(const Mat22& gam, int sign, const Word& w) {
  Word out;
  out.reserve(w.size());
  for (const WordTerm& term : w)
    out.push_back({normalize_pm(mmul(gam, term.g)), sign * term.s, term.i});
  return out;
}

void word_append(Word& dst, const Word& src) { dst.insert(dst.end(), src.begin(), src.end()); }

}  // namespace

Word express_int_path(const Domain& D, int64_t m) {
  Word word;
  auto unit_step = [&D](int64_t j) {
    Mat22 e{j + 1, j, 1, 1};
    auto [rep, gam] = reduce_to_E(D, e);
    assert(!(path_from(rep) == Cusp{1, 0}) && !(path_to(rep) == Cusp{1, 0}));
    return word_scale(gam, +1, express_E(D, rep));
  };
  if (m < 1) {
    for (int64_t j = m; j < 1; j++) word_append(word, unit_step(j));
  } else {
    for (int64_t j = 1; j < m; j++) word_append(word, word_scale(MAT_ID, -1, unit_step(j)));
  }
  return word;
}

Word express_path(const Domain& D, Cusp x, Cusp y) {
  assert(D.finished);
  if (cusp_in_inf_orbit(x, D.N) || cusp_in_inf_orbit(y, D.N))
    throw SupportError("divisor support meets the infinity orbit");
  if (x == y) return {};
  std::vector<Mat22> chain = cf_decompose(y, x);
  Word word;
  size_t i = 0;
  while (i < chain.size()) {
    const Mat22& u = chain[i];
    auto [rep, gam] = reduce_to_E(D, u);
    bool touches = path_from(rep) == Cusp{1, 0} || path_to(rep) == Cusp{1, 0};
    if (!touches) {
      word_append(word, word_scale(gam, +1, express_E(D, rep)));
      i++;
      continue;
    }
    // reduced chain enters infinity: must arrive along e_left and leave along
    // e_right; the pair combines through an upper-triangular shift
    assert(normalize_pm(rep) == D.e_left && "expected arrival at infinity");
    assert(i + 1 < chain.size());
    auto [rep2, gam2] = reduce_to_E(D, chain[i + 1]);
    assert(normalize_pm(rep2) == D.e_right && "expected departure from infinity");
    Mat22 S = normalize_pm(mmul(minv(gam2), gam));
    assert(S.c == 0 && S.a * S.d == 1);
    if (S.a == -1) S = Mat22{-S.a, -S.b, -S.c, -S.d};
    word_append(word, word_scale(gam2, +1, express_int_path(D, S.b)));
    i += 2;
  }
  return word;
}

Word express_divisor(const Domain& D, const Divisor& d_in) {
  Divisor div = d_in;
  int deg = 0;
  for (const auto& [c, m] : div) deg += m;
  assert(deg == 0 && "divisor must have degree zero");
  Word word;
  while (!div.empty()) {
    const Cusp* xp = nullptr;
    const Cusp* xm = nullptr;
    for (const auto& [c, m] : div) {  // map order = lex order, matches min()
      if (m > 0 && !xp) xp = &c;
      if (m < 0 && !xm) xm = &c;
    }
    assert(xp && xm);
    Cusp cp = *xp, cm = *xm;
    word_append(word, express_path(D, cp, cm));
    if (--div[cp] == 0) div.erase(cp);
    if (++div[cm] == 0) div.erase(cm);
  }
  return word;
}

Divisor eval_word(const Domain& D, const Word& w, const std::vector<Mat22>* lift) {
  Divisor acc;
  auto add = [&acc](const Cusp& c, int m) {
    acc[c] += m;
    if (acc[c] == 0) acc.erase(c);
  };
  for (const WordTerm& term : w) {
    const Mat22& gen = lift ? (*lift)[term.i] : D.gens[term.i];
    Mat22 e = mmul(term.g, gen);
    add(path_to(e), term.s);
    add(path_from(e), -term.s);
  }
  return acc;
}

std::vector<Mat22> build_etas(int64_t N, unsigned p) {
  std::vector<Mat22> etas;
  for (unsigned j = 0; j < p; j++) etas.push_back(Mat22{1, 0, N * (int64_t)j, 1});
  // a = p^{-1} mod N (extended Euclid), smallest positive
  int64_t r0 = N, r1 = (int64_t)p % N, s0 = 0, s1 = 1;
  while (r1) {
    int64_t k = r0 / r1;
    int64_t r2 = r0 - k * r1, s2 = s0 - k * s1;
    r0 = r1;
    r1 = r2;
    s0 = s1;
    s1 = s2;
  }
  assert(r0 == 1 && "p must be invertible mod N");
  int64_t a = ((s0 % N) + N) % N;
  int64_t b = (a * (int64_t)p - 1) / N;
  assert(a * (int64_t)p - b * N == 1);
  etas.push_back(Mat22{a, b, N, (int64_t)p});
  return etas;
}

WordTerm lift_term(const WordTerm& term, const std::vector<Mat22>& etas, int64_t Np, int t) {
  for (int j = 0; j < (int)etas.size(); j++) {
    Mat22 d = mmul(term.g, minv(etas[j]));
    if (d.c % Np == 0) return WordTerm{d, term.s, j * t + term.i};
  }
  throw std::logic_error("lift_term: no eta coset matched");
}

namespace {

UpTable table_for_reps(const Domain& D, unsigned p, const std::vector<Mat22>& reps) {
  assert(D.finished);
  const int64_t N = D.N, Np = N * (int64_t)p;
  const int t = D.t;
  std::vector<Mat22> etas = build_etas(N, p);
  const int st = (int)(p + 1) * t;
  UpTable table(st);
  for (int it = 0; it < st; it++) {
    int jp = it / t, i = it % t;
    Mat22 et = mmul(etas[jp], D.gens[i]);
    for (const Mat22& ga : reps) {
      int64_t q = mdet(ga);
      Mat22 em = mmul(ga, et);
      Divisor div;
      div[path_to(em)] += 1;
      div[path_from(em)] -= 1;
      std::erase_if(div, [](const auto& kv) { return kv.second == 0; });
      for (const WordTerm& w : express_divisor(D, div)) {
        WordTerm lw = lift_term(w, etas, Np, t);
        Mat22 mu = mmul(minv(lw.g), ga);
        assert(mdet(mu) == q);
        assert(mu.c % (int64_t)p == 0 && mu.a % (int64_t)p != 0 && "not in the monoid");
        (void)q;
        table[it].push_back(UpTerm{mu, lw.s, lw.i});
      }
    }
  }
  return table;
}

}  // namespace

UpTable up_table(const Domain& D, unsigned p) {
  std::vector<Mat22> reps;
  for (unsigned a = 0; a < p; a++) reps.push_back(Mat22{1, (int64_t)a, 0, (int64_t)p});
  return table_for_reps(D, p, reps);
}

UpTable hecke_table(const Domain& D, unsigned p, const std::vector<Mat22>& reps) {
  return table_for_reps(D, p, reps);
}

}  // namespace halo
