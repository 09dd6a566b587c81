#include "halo/spectral.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "halo/kernels.hpp"
#include "halo/weight.hpp"

namespace halo {

unsigned certified_J(unsigned p, unsigned st, size_t S) {
  return (unsigned)((S * (p - 1)) / ((size_t)p * st));
}

size_t minor_for(unsigned p, unsigned st, unsigned J) {
  size_t Dd = ((size_t)p * J + (p - 2)) / (p - 1);
  if (Dd == 0) Dd = 1;
  return (size_t)st * Dd;
}

size_t sizing_heuristic(unsigned p, unsigned st, unsigned n_max, unsigned J) {
  size_t rows = (size_t)p * ((size_t)n_max + J);
  return (size_t)st * ((rows + st - 1) / st);
}

UpMatrix assemble_up(const TsRing& T, const UpTable& tab, unsigned j, unsigned Dd) {
  const unsigned p = T.R.p;
  const unsigned st = (unsigned)tab.size();
  if (st == 0 || Dd == 0) throw std::invalid_argument("assemble_up: empty window");
  UpMatrix U;
  U.p = p;
  U.j = j;
  U.st = st;
  U.Dd = Dd;
  U.S = (size_t)st * Dd;
  U.T = T;
  U.G.assign(U.S * U.S, TSeries::zero(T));
  std::map<Mat22, ActMatrix> cache;
  for (unsigned i = 0; i < st; i++) {
    for (const UpTerm& term : tab[i]) {
      auto it = cache.find(term.mu);
      if (it == cache.end()) {
        if (!in_lower_monoid(p, term.mu))
          throw MonoidError("table element outside the U_p coset monoid");
        it = cache.emplace(term.mu, act_matrix(T, term.mu, j, Dd, Dd)).first;
      }
      const ActMatrix& A = it->second;
      for (unsigned m = 0; m < Dd; m++)
        for (unsigned n = 0; n < Dd; n++) {
          TSeries& dst = U.G[((size_t)m * st + i) * U.S + (size_t)n * st + term.idx];
          dst = term.s == 1 ? ts_add(T, dst, A.at(m, n)) : ts_sub(T, dst, A.at(m, n));
        }
    }
  }
  for (size_t r = 0; r < U.S; r++)
    for (size_t c = 0; c < U.S; c++) {
      long bound = (long)(c / st) - (long)(r / ((size_t)p * st));
      Verdict v = bound_verdict(tseries_mval(T, U.G[r * U.S + c]), bound);
      if (v == Verdict::FAIL)
        throw std::logic_error("assembled row estimate certified-violated at (" +
                               std::to_string(r) + "," + std::to_string(c) + ")");
      if (v == Verdict::PASS) U.assembled.pass++;
      else U.assembled.inconclusive++;
    }
  return U;
}

namespace {

std::vector<uint64_t> flatten(const TsRing& T, const std::vector<TSeries>& M) {
  std::vector<uint64_t> f((size_t)M.size() * T.K);
  for (size_t i = 0; i < M.size(); i++)
    std::copy(M[i].c.begin(), M[i].c.end(), f.begin() + i * T.K);
  return f;
}

// maximal runs [lo, hi) of columns whose block is nonzero, per row
using Runs = std::vector<std::vector<std::pair<unsigned, unsigned>>>;

Runs nonzero_runs(const std::vector<uint64_t>& g, size_t S, unsigned K) {
  Runs runs(S);
  for (size_t r = 0; r < S; r++) {
    const uint64_t* row = g.data() + r * S * K;
    unsigned c = 0;
    while (c < S) {
      bool nz = false;
      for (unsigned t = 0; t < K; t++)
        if (row[(size_t)c * K + t]) {
          nz = true;
          break;
        }
      if (!nz) {
        c++;
        continue;
      }
      unsigned lo = c;
      while (c < S) {
        bool nz2 = false;
        for (unsigned t = 0; t < K; t++)
          if (row[(size_t)c * K + t]) {
            nz2 = true;
            break;
          }
        if (!nz2) break;
        c++;
      }
      runs[r].push_back({lo, c});
    }
  }
  return runs;
}

// acc += (row r of g, restricted to columns < lim) . w
void row_dot(uint64_t* acc, const std::vector<uint64_t>& g, const Runs& runs, size_t S,
             unsigned K, const SmallRing& R, ts_dot_fn dot, size_t r, const uint64_t* w,
             size_t lim) {
  const uint64_t* row = g.data() + r * S * K;
  for (auto [lo, hi] : runs[r]) {
    unsigned top = hi < lim ? hi : (unsigned)lim;
    if (lo >= top) break;
    dot(acc, row + (size_t)lo * K, w + (size_t)lo * K, top - lo, K, K, R);
  }
}

// det(1 - X G) over Z/q[T]/(T^K), X-coefficients 0..n_max
std::vector<TSeries> berkowitz_ts(const TsRing& T, const std::vector<uint64_t>& g, size_t S,
                                  size_t n_max) {
  const SmallRing& R = T.R;
  const unsigned K = T.K;
  ts_mul_fn mul = select_ts_mul(R);
  ts_dot_fn dot = select_ts_dot(R);
  Runs runs = nonzero_runs(g, S, K);
  std::vector<TSeries> cser{TSeries::one(T)};
  std::vector<uint64_t> w, w2, q, conv(K);
  for (size_t r = 1; r <= S; r++) {
    const size_t rm = r - 1;
    const size_t imax = std::min(r, n_max);
    q.assign((imax + 1) * K, 0);
    q[0] = 1;
    if (imax >= 1)
      for (unsigned t = 0; t < K; t++) q[K + t] = R.neg(g[(rm * S + rm) * K + t]);
    if (imax >= 2) {
      w.assign(rm * K, 0);
      for (size_t i2 = 0; i2 < rm; i2++)
        std::copy(g.begin() + (i2 * S + rm) * K, g.begin() + (i2 * S + rm) * K + K,
                  w.begin() + i2 * K);
      for (size_t i = 2; i <= imax; i++) {
        std::fill(conv.begin(), conv.end(), 0);
        row_dot(conv.data(), g, runs, S, K, R, dot, rm, w.data(), rm);
        for (unsigned t = 0; t < K; t++) q[i * K + t] = R.neg(conv[t]);
        if (i < imax) {
          w2.assign(rm * K, 0);
          for (size_t row = 0; row < rm; row++)
            row_dot(w2.data() + row * K, g, runs, S, K, R, dot, row, w.data(), rm);
          w.swap(w2);
        }
      }
    }
    std::vector<TSeries> newc(imax + 1, TSeries::zero(T));
    for (size_t i = 0; i <= imax; i++) {
      uint64_t* out = newc[i].c.data();
      for (size_t jj = 0; jj <= i && jj <= imax; jj++) {
        if (i - jj >= cser.size()) continue;
        mul(conv.data(), q.data() + jj * K, cser[i - jj].c.data(), K, R);
        for (unsigned t = 0; t < K; t++) out[t] = R.add(out[t], conv[t]);
      }
    }
    cser = std::move(newc);
  }
  cser.resize(n_max + 1, TSeries::zero(T));
  return cser;
}

void check_window(const UpMatrix& U, unsigned n_max) {
  if ((size_t)n_max > U.S)
    throw TruncationError(
        "characteristic window too small for n_max=" + std::to_string(n_max) +
        ": increase truncation to Dd >= " +
        std::to_string(((size_t)n_max + U.st - 1) / U.st) + " (S >= " +
        std::to_string(n_max) + ")");
}

FredholmSeries make_series(const UpMatrix& U, unsigned n_max) {
  FredholmSeries F;
  F.p = U.p;
  F.j = U.j;
  F.st = U.st;
  F.Dd = U.Dd;
  F.S = U.S;
  F.J = certified_J(U.p, U.st, U.S);
  F.n_max = n_max;
  F.T = U.T;
  F.pguard.assign(n_max + 1, 0);
  return F;
}

}  // namespace

unsigned FredholmSeries::cert(unsigned n, unsigned t) const {
  if (n > n_max || t >= T.K) return 0;
  long truncation = (long)J - (long)t;
  long digits = (long)T.R.M - (long)pguard[n];
  long d = truncation < digits ? truncation : digits;
  return d > 0 ? (unsigned)d : 0;
}

FredholmSeries fredholm(const UpMatrix& U, unsigned n_max) {
  check_window(U, n_max);
  FredholmSeries F = make_series(U, n_max);
  F.c = berkowitz_ts(U.T, flatten(U.T, U.G), U.S, n_max);
  return F;
}

FredholmSeries fredholm_via_traces(const UpMatrix& U, unsigned n_max) {
  check_window(U, n_max);
  const TsRing& T = U.T;
  const SmallRing& R = T.R;
  const size_t S = U.S;
  const unsigned K = T.K;
  ts_dot_fn dot = select_ts_dot(R);
  FredholmSeries F = make_series(U, n_max);

  auto matmul = [&](const std::vector<uint64_t>& A, const std::vector<uint64_t>& B) {
    std::vector<uint64_t> out(S * S * K, 0);
    Runs runs = nonzero_runs(A, S, K);
    for (size_t i = 0; i < S; i++)
      for (size_t c = 0; c < S; c++) {
        uint64_t* acc = out.data() + (i * S + c) * K;
        for (auto [lo, hi] : runs[i])
          dot(acc, A.data() + (i * S + lo) * K, B.data() + (lo * S + c) * K, hi - lo,
              S * K, K, R);
      }
    return out;
  };
  auto trace_of = [&](const std::vector<uint64_t>& A) {
    TSeries tr = TSeries::zero(T);
    for (size_t i = 0; i < S; i++)
      for (unsigned t = 0; t < K; t++) tr.c[t] = R.add(tr.c[t], A[(i * S + i) * K + t]);
    return tr;
  };
  auto pair_trace = [&](const std::vector<uint64_t>& A, const std::vector<uint64_t>& B) {
    std::vector<uint64_t> acc(K, 0);
    for (size_t i = 0; i < S; i++)
      dot(acc.data(), A.data() + i * S * K, B.data() + i * K, S, S * K, K, R);
    TSeries tr = TSeries::zero(T);
    std::copy(acc.begin(), acc.end(), tr.c.begin());
    return tr;
  };

  const unsigned m0 = std::min<unsigned>(n_max, 10);
  std::map<unsigned, std::vector<uint64_t>> pows;
  std::vector<TSeries> tr(n_max + 1, TSeries::zero(T));
  pows[1] = flatten(T, U.G);
  if (n_max >= 1) tr[1] = trace_of(pows[1]);
  for (unsigned k = 2; k <= m0; k++) {
    pows[k] = matmul(pows[1], pows[k - 1]);
    tr[k] = trace_of(pows[k]);
  }
  for (unsigned k = m0 + 1; k <= n_max; k++) {
    unsigned a = 10 * ((k - 1) / 10);
    if (!pows.count(a)) pows[a] = matmul(pows[a - 10], pows[10]);
    tr[k] = pair_trace(pows[a], pows[k - a]);
  }
  pows.clear();

  // k e_k = sum_{i<=k} (-1)^(i-1) e_{k-i} tr_i; the residues stay exactly
  // divisible by the p-part of k, the unit part inverts, v_p(k) digits lost
  std::vector<TSeries> e(n_max + 1, TSeries::zero(T));
  e[0] = TSeries::one(T);
  for (unsigned k = 1; k <= n_max; k++) {
    TSeries acc = TSeries::zero(T);
    for (unsigned i = 1; i <= k; i++) {
      TSeries term = ts_mul(T, e[k - i], tr[i]);
      acc = i % 2 == 1 ? ts_add(T, acc, term) : ts_sub(T, acc, term);
    }
    unsigned v = vp_u64(U.p, k);
    uint64_t unit = k;
    for (unsigned s = 0; s < v; s++) unit /= U.p;
    uint64_t uinv = R.inv(unit % R.q);
    for (unsigned t = 0; t < K; t++)
      e[k].c[t] = R.mul(R.divexact_p(acc.c[t], v), uinv);
    F.pguard[k] = F.pguard[k - 1] + v;
  }
  F.c.resize(n_max + 1, TSeries::zero(T));
  for (unsigned n = 0; n <= n_max; n++) F.c[n] = n % 2 ? ts_neg(T, e[n]) : e[n];
  return F;
}

std::vector<long> lambda_profile(unsigned p, unsigned st, unsigned n_hi) {
  std::vector<long> lam(n_hi + 1, 0);
  for (unsigned n = 1; n <= n_hi; n++) {
    unsigned i = n - 1;
    lam[n] = lam[n - 1] + (long)(i / st) - (long)(i / (p * st));
  }
  return lam;
}

long lambda_closed_form(unsigned p, unsigned t, unsigned k) {
  return (long)(p - 1) * p * (p + 1) * (long)k * (long)k * (long)t / 2;
}

BoundCheck lambda_bound_check(const FredholmSeries& F) {
  BoundCheck out;
  const SmallRing& R = F.T.R;
  std::vector<long> lam = lambda_profile(F.p, F.st, F.n_max);
  for (unsigned n = 0; n <= F.n_max; n++) {
    unsigned certd = R.M > F.pguard[n] ? R.M - F.pguard[n] : 0;
    for (unsigned m = 0; m < F.T.K && (long)m < lam[n]; m++) {
      long need = lam[n] - (long)m;
      unsigned v = R.vp(F.c[n].c[m]);
      if (v < certd) {
        if ((long)v >= need) out.pass++;
        else {
          out.fail++;
          out.failures.push_back({n, m});
        }
      } else if ((long)certd >= need) {
        out.pass++;
      } else {
        out.inconclusive++;
      }
    }
  }
  return out;
}

StabilityReport stability_check(const FredholmSeries& F1, const FredholmSeries& F2) {
  StabilityReport rep;
  if (F1.p != F2.p || F1.j != F2.j || F1.st != F2.st || F1.T.R.M != F2.T.R.M ||
      F1.T.K != F2.T.K) {
    rep.note = "windows incomparable";
    return rep;
  }
  rep.J = std::min(F1.J, F2.J);
  const SmallRing& R = F1.T.R;
  const unsigned n_hi = std::min(F1.n_max, F2.n_max);
  rep.ok = true;
  for (unsigned n = 0; n <= n_hi; n++) {
    unsigned cert3 = R.M - std::max(F1.pguard[n], F2.pguard[n]);
    for (unsigned m = 0; m < F1.T.K; m++) {
      uint64_t d = R.sub(F2.c[n].c[m], F1.c[n].c[m]);
      if (!d) continue;
      long vd = std::min<long>(R.vp(d), cert3);
      long comb = vd + (long)m;
      if (!rep.min_diff_val || comb < *rep.min_diff_val) rep.min_diff_val = comb;
      if (comb < (long)rep.J) rep.ok = false;
    }
  }
  rep.note = rep.ok ? "all coefficient diffs outside m^" + std::to_string(rep.J)
                    : "diff inside the certified minor ideal";
  return rep;
}

SpecializeReport specialize_check(const UpMatrix& U, const FredholmSeries& F, unsigned k) {
  const TsRing& T = U.T;
  const SmallRing& R = T.R;
  SpecializeReport rep;
  rep.k = k;
  rep.n_max = F.n_max;
  PadicCtx C = PadicCtx::make(U.p, R.M);
  uint64_t b = beta_center(C, k, R.M).v.low_u64();
  auto horner = [&](const TSeries& s) {
    uint64_t acc = 0;
    for (unsigned m = T.K; m-- > 0;) acc = R.add(R.mul(acc, b), s.c[m]);
    return acc;
  };
  std::vector<uint64_t> Gs(U.S * U.S);
  for (size_t i = 0; i < Gs.size(); i++) Gs[i] = horner(U.G[i]);
  std::vector<uint64_t> d = berkowitz_fredholm_u64(R, Gs, U.S, F.n_max);

  // both sides factor through the same (M, K) truncation; the only slack is
  // the T^K tail scaled by v(beta) plus the series route's p-guards
  unsigned vb = k == 0 ? R.M : 1 + vp_u64(U.p, k);
  unsigned long long tail = (unsigned long long)T.K * vb;
  unsigned base = tail < R.M ? (unsigned)tail : R.M;
  rep.ok = true;
  rep.digits = base;
  for (unsigned n = 0; n <= F.n_max; n++) {
    unsigned dn = base > F.pguard[n] ? base - F.pguard[n] : 0;
    if (dn < rep.digits) rep.digits = dn;
    uint64_t diff = R.sub(horner(F.c[n]), d[n]);
    if (diff && R.vp(diff) < dn) rep.ok = false;
  }
  rep.note = "charpoly of the specialized window vs the specialized series, k=" +
             std::to_string(k) + ", " + std::to_string(rep.digits) + " digits";
  return rep;
}

std::vector<uint64_t> berkowitz_fredholm_u64(const SmallRing& R,
                                             const std::vector<uint64_t>& G, size_t S,
                                             size_t n_max) {
  TsRing T1{R, 1};
  std::vector<TSeries> cs = berkowitz_ts(T1, G, S, n_max);
  std::vector<uint64_t> out(n_max + 1);
  for (size_t i = 0; i <= n_max; i++) out[i] = cs[i].c[0];
  return out;
}

std::vector<Zw> berkowitz_fredholm_zw(const PadicCtx& C, const std::vector<Zw>& G, size_t S,
                                      size_t n_max) {
  std::vector<std::vector<unsigned>> nz(S);
  for (size_t r = 0; r < S; r++)
    for (unsigned c = 0; c < S; c++)
      if (!G[r * S + c].is_zero(C)) nz[r].push_back(c);
  std::vector<Zw> cser{Zw::from_u64(C, 1)};
  std::vector<Zw> w, w2, q;
  for (size_t r = 1; r <= S; r++) {
    const size_t rm = r - 1;
    const size_t imax = std::min(r, n_max);
    q.assign(imax + 1, Zw::zero());
    q[0] = Zw::from_u64(C, 1);
    if (imax >= 1) q[1] = G[rm * S + rm].neg(C);
    if (imax >= 2) {
      w.assign(rm, Zw::zero());
      for (size_t i2 = 0; i2 < rm; i2++) w[i2] = G[i2 * S + rm];
      for (size_t i = 2; i <= imax; i++) {
        Zw dotv = Zw::zero();
        for (unsigned c : nz[rm]) {
          if (c >= rm) break;
          if (!w[c].is_zero(C)) dotv = dotv.add(C, G[rm * S + c].mul(C, w[c]));
        }
        q[i] = dotv.neg(C);
        if (i < imax) {
          w2.assign(rm, Zw::zero());
          for (size_t row = 0; row < rm; row++) {
            Zw acc = Zw::zero();
            for (unsigned c : nz[row]) {
              if (c >= rm) break;
              if (!w[c].is_zero(C)) acc = acc.add(C, G[row * S + c].mul(C, w[c]));
            }
            w2[row] = acc;
          }
          w.swap(w2);
        }
      }
    }
    std::vector<Zw> newc(imax + 1, Zw::zero());
    for (size_t i = 0; i <= imax; i++) {
      Zw acc = Zw::zero();
      for (size_t jj = 0; jj <= i && jj <= imax; jj++) {
        if (i - jj >= cser.size()) continue;
        if (q[jj].is_zero(C) || cser[i - jj].is_zero(C)) continue;
        acc = acc.add(C, q[jj].mul(C, cser[i - jj]));
      }
      newc[i] = acc;
    }
    cser = std::move(newc);
  }
  cser.resize(n_max + 1, Zw::zero());
  return cser;
}

CenterSeries center_fredholm(const PadicCtx& C, const UpTable& tab, unsigned j, unsigned k,
                             unsigned Dd) {
  const unsigned st = (unsigned)tab.size();
  if (st == 0 || Dd == 0) throw std::invalid_argument("center_fredholm: empty window");
  CenterSeries out;
  out.p = C.p;
  out.j = j;
  out.k = k;
  out.st = st;
  out.Dd = Dd;
  out.S = (size_t)st * Dd;
  out.Mc = C.M;
  out.J = certified_J(C.p, st, out.S);
  std::vector<Zw> G(out.S * out.S);
  std::map<Mat22, std::vector<Zw>> cache;
  for (unsigned i = 0; i < st; i++) {
    for (const UpTerm& term : tab[i]) {
      auto it = cache.find(term.mu);
      if (it == cache.end()) {
        if (!in_lower_monoid(C.p, term.mu))
          throw MonoidError("table element outside the U_p coset monoid");
        it = cache.emplace(term.mu, act_matrix_center(C, term.mu, j, k, Dd, Dd)).first;
      }
      const std::vector<Zw>& blk = it->second;
      for (unsigned m = 0; m < Dd; m++)
        for (unsigned n = 0; n < Dd; n++) {
          Zw& dst = G[((size_t)m * st + i) * out.S + (size_t)n * st + term.idx];
          const Zw& src = blk[(size_t)m * Dd + n];
          dst = term.s == 1 ? dst.add(C, src) : dst.sub(C, src);
        }
    }
  }
  out.d = berkowitz_fredholm_zw(C, G, out.S, out.S);
  return out;
}

std::string fredholm_json(const FredholmSeries& F) {
  nlohmann::ordered_json out;
  out["schema"] = "halo-fredholm/1";
  out["p"] = F.p;
  out["j"] = F.j;
  out["st"] = F.st;
  out["Dd"] = F.Dd;
  out["S"] = F.S;
  out["J"] = F.J;
  out["M"] = F.T.R.M;
  out["K"] = F.T.K;
  out["n_max"] = F.n_max;
  auto coeffs = nlohmann::ordered_json::array();
  for (unsigned n = 0; n <= F.n_max; n++) {
    nlohmann::ordered_json row;
    row["n"] = n;
    row["pguard"] = F.pguard[n];
    auto terms = nlohmann::ordered_json::array();
    for (unsigned m = 0; m < F.T.K; m++) {
      unsigned digits = F.cert(n, m);
      if (digits == 0) continue;
      uint64_t b = F.c[n].c[m] % F.T.R.pe[digits];
      terms.push_back({{"m", m}, {"b", std::to_string(b)}, {"digits", digits}});
    }
    row["terms"] = std::move(terms);
    coeffs.push_back(std::move(row));
  }
  out["coeffs"] = std::move(coeffs);
  return out.dump(2);
}

}  // namespace halo
