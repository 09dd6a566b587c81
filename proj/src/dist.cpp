#include "halo/dist.hpp"

#include <string>

#include "halo/weight.hpp"

namespace halo {

bool in_sigma0(unsigned p, const Mat22& g) {
  return g.a % (int64_t)p != 0 && g.c % (int64_t)p == 0 && mdet(g) != 0;
}

bool in_lower_monoid(unsigned p, const Mat22& g) {
  return in_sigma0(p, g) && g.d % (int64_t)p == 0;
}

namespace {

std::string mat_str(const Mat22& g) {
  return "(" + std::to_string(g.a) + "," + std::to_string(g.b) + ";" + std::to_string(g.c) +
         "," + std::to_string(g.d) + ")";
}

void require_monoid(unsigned p, const Mat22& g) {
  if (!in_sigma0(p, g))
    throw MonoidError("matrix " + mat_str(g) +
                      " outside Sigma_0(" + std::to_string(p) + ")");
}

// per sample point z = i: the character value chi(a+ci) and w_i = (b+di)/(a+ci)
// as a residue in the widened ctx Cw
struct Samples {
  PadicCtx Cw;
  std::vector<TSeries> chi;
  std::vector<Zw> w;
};

Samples make_samples(const TsRing& T, const Mat22& g, unsigned j, unsigned count,
                     unsigned mmax) {
  Samples s{PadicCtx::make(T.R.p, T.R.M + vp_factorial(T.R.p, mmax) + 2), {}, {}};
  s.chi.reserve(count);
  s.w.reserve(count);
  for (unsigned i = 0; i < count; i++) {
    int64_t u = checked_add(g.a, checked_mul(g.c, (int64_t)i));
    int64_t bd = checked_add(g.b, checked_mul(g.d, (int64_t)i));
    s.chi.push_back(universal_char(T, u, j));
    Zw uz = Zw::from_i64(s.Cw, u);
    s.w.push_back(Zw::from_i64(s.Cw, bd).mul(s.Cw, uz.inv(s.Cw)));
  }
  return s;
}

}  // namespace

std::vector<TSeries> act_on_basis(const TsRing& T, const Mat22& g, unsigned j, unsigned n,
                                  unsigned max_order) {
  require_monoid(T.R.p, g);
  Samples s = make_samples(T, g, j, max_order + 1, n);
  std::vector<TSeries> vals;
  vals.reserve(max_order + 1);
  for (unsigned i = 0; i <= max_order; i++)
    vals.push_back(ts_scale(T, binom_rep_u64(s.Cw, s.w[i], n, T.R), s.chi[i]));
  std::vector<TSeries> out;
  out.reserve(max_order + 1);
  out.push_back(vals[0]);
  for (unsigned q = 1; q <= max_order; q++) {
    for (unsigned i = 0; i + q <= max_order; i++) vals[i] = ts_sub(T, vals[i + 1], vals[i]);
    out.push_back(vals[0]);
  }
  return out;
}

long decay_bound(unsigned p, const Mat22& g, unsigned m, unsigned n) {
  long b = (long)n - (long)m;
  if (g.d % (int64_t)p == 0) b = (long)n - (long)(m / p);
  return b > 0 ? b : 0;
}

Verdict bound_verdict(const MVal& mv, long bound) {
  if (bound <= 0 || mv.v >= bound) return Verdict::PASS;
  return mv.exact ? Verdict::FAIL : Verdict::INCONCLUSIVE;
}

VerdictTally tally(const std::vector<Verdict>& vs) {
  VerdictTally t;
  for (Verdict v : vs) {
    if (v == Verdict::PASS) t.pass++;
    else if (v == Verdict::INCONCLUSIVE) t.inconclusive++;
    else t.fail++;
  }
  return t;
}

ActMatrix act_matrix(const TsRing& T, const Mat22& g, unsigned j, unsigned rows,
                     unsigned cols) {
  require_monoid(T.R.p, g);
  Samples s = make_samples(T, g, j, cols, rows ? rows - 1 : 0);
  ActMatrix A;
  A.gamma = g;
  A.j = j;
  A.rows = rows;
  A.cols = cols;
  A.guard = s.Cw.M - T.R.M;
  A.P.resize((size_t)rows * cols, TSeries::zero(T));
  std::vector<TSeries> vals(cols, TSeries::zero(T));
  for (unsigned m = 0; m < rows; m++) {
    for (unsigned i = 0; i < cols; i++)
      vals[i] = ts_scale(T, binom_rep_u64(s.Cw, s.w[i], m, T.R), s.chi[i]);
    if (cols) A.P[(size_t)m * cols] = vals[0];
    for (unsigned n = 1; n < cols; n++) {
      for (unsigned i = 0; i + n < cols; i++) vals[i] = ts_sub(T, vals[i + 1], vals[i]);
      A.P[(size_t)m * cols + n] = vals[0];
    }
  }
  A.verdicts.resize(A.P.size());
  for (unsigned m = 0; m < rows; m++)
    for (unsigned n = 0; n < cols; n++) {
      Verdict v = bound_verdict(tseries_mval(T, A.at(m, n)),
                                decay_bound(T.R.p, g, m, n));
      if (v == Verdict::FAIL)
        throw std::logic_error("decay bound certified-violated at entry (" +
                               std::to_string(m) + "," + std::to_string(n) + ") of " +
                               mat_str(g) + ": action convention bug");
      A.verdicts[(size_t)m * cols + n] = v;
    }
  return A;
}

std::vector<Zw> act_matrix_center(const PadicCtx& C, const Mat22& g, unsigned j, unsigned k,
                                  unsigned rows, unsigned cols) {
  require_monoid(C.p, g);
  PadicCtx Cw = PadicCtx::make(C.p, C.M + vp_factorial(C.p, rows ? rows - 1 : 0) + 2);
  std::vector<Zw> chi(cols), w(cols);
  for (unsigned i = 0; i < cols; i++) {
    int64_t u = checked_add(g.a, checked_mul(g.c, (int64_t)i));
    int64_t bd = checked_add(g.b, checked_mul(g.d, (int64_t)i));
    chi[i] = teich_pow(Cw, u, j).mul(Cw, unit_part(Cw, u).pow_u64(Cw, k));
    w[i] = Zw::from_i64(Cw, bd).mul(Cw, Zw::from_i64(Cw, u).inv(Cw));
  }
  std::vector<Zw> out((size_t)rows * cols);
  std::vector<Zw> vals(cols);
  for (unsigned m = 0; m < rows; m++) {
    for (unsigned i = 0; i < cols; i++)
      vals[i] = chi[i].mul(Cw, binom_rep_zw(Cw, w[i], m, Cw));
    if (cols) out[(size_t)m * cols] = vals[0].reduce(Cw, C.M);
    for (unsigned n = 1; n < cols; n++) {
      for (unsigned i = 0; i + n < cols; i++) vals[i] = vals[i + 1].sub(Cw, vals[i]);
      out[(size_t)m * cols + n] = vals[0].reduce(Cw, C.M);
    }
  }
  return out;
}

}  // namespace halo
