#include "halo/newton.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace halo {

namespace {

const char* flag_str(PtFlag f) {
  switch (f) {
    case PtFlag::EXACT: return "EXACT";
    case PtFlag::ATLEAST: return "AT-LEAST";
    default: return "TIE";
  }
}

const char* verdict_str(Verdict v) {
  switch (v) {
    case Verdict::PASS: return "PASS";
    case Verdict::INCONCLUSIVE: return "INCONCLUSIVE";
    default: return "FAIL";
  }
}

Verdict worse(Verdict a, Verdict b) { return (int)a >= (int)b ? a : b; }

// component label from alpha = (p-1) x, x in [n,n] or (n,n+1)
std::string interval_label(const Rational& alpha, unsigned p) {
  Rational x = alpha / Rational((int64_t)p - 1);
  if (x.den == 1) return "[" + std::to_string(x.num) + "," + std::to_string(x.num) + "]";
  int64_t fl = x.num / x.den;
  return "(" + std::to_string(fl) + "," + std::to_string(fl + 1) + ")";
}

}  // namespace

Polygon make_polygon(std::vector<PolyPoint> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const PolyPoint& a, const PolyPoint& b) { return a.n < b.n; });
  Polygon P;
  P.points = std::move(pts);
  P.n_max = P.points.empty() ? 0 : P.points.back().n;
  std::vector<std::pair<int64_t, Rational>> hull;
  for (const PolyPoint& pt : P.points) {
    if (pt.flag != PtFlag::EXACT) continue;
    int64_t x = pt.n;
    while (hull.size() >= 2) {
      auto& [x1, y1] = hull[hull.size() - 2];
      auto& [x2, y2] = hull[hull.size() - 1];
      // drop the middle vertex while it sits on or above the new chord
      if ((y2 - y1) * Rational(x - x1) >= (pt.y - y1) * Rational(x2 - x1))
        hull.pop_back();
      else
        break;
    }
    hull.push_back({x, pt.y});
  }
  for (auto& [x, y] : hull) P.hull.push_back({(unsigned)x, y});
  for (size_t s = 0; s + 1 < hull.size(); s++) {
    HullSeg seg;
    seg.x0 = (unsigned)hull[s].first;
    seg.x1 = (unsigned)hull[s + 1].first;
    seg.y0 = hull[s].second;
    seg.y1 = hull[s + 1].second;
    seg.slope = (seg.y1 - seg.y0) / Rational((int64_t)seg.x1 - (int64_t)seg.x0);
    for (const PolyPoint& pt : P.points) {
      if (pt.flag == PtFlag::EXACT || pt.n < seg.x0 || pt.n > seg.x1) continue;
      Rational at = seg.y0 + seg.slope * Rational((int64_t)pt.n - (int64_t)seg.x0);
      if (pt.y <= at) {
        seg.certified = false;
        break;
      }
    }
    P.segs.push_back(seg);
    P.slopes.push_back({seg.slope, seg.x1 - seg.x0});
  }
  return P;
}

std::optional<Rational> polygon_value(const Polygon& P, unsigned n) {
  if (P.hull.empty() || n < P.hull.front().first || n > P.hull.back().first) return {};
  for (const HullSeg& s : P.segs)
    if (n >= s.x0 && n <= s.x1)
      return s.y0 + s.slope * Rational((int64_t)n - (int64_t)s.x0);
  return P.hull.front().second;  // single-vertex hull
}

std::vector<std::pair<Rational, unsigned>> slopes_below(const Polygon& P,
                                                        const Rational& cutoff) {
  std::vector<std::pair<Rational, unsigned>> out;
  for (const auto& [s, m] : P.slopes)
    if (s < cutoff) out.push_back({s, m});
  return out;
}

Polygon newton_at(const FredholmSeries& F, const WeightSpec& w) {
  if (w.mode == WeightSpec::Mode::Universal)
    throw std::invalid_argument("newton_at: universal weight has no single polygon");
  const TsRing& T = F.T;
  const SmallRing& R = T.R;
  std::vector<PolyPoint> pts;
  pts.reserve(F.n_max + 1);
  if (w.mode == WeightSpec::Mode::Center) {
    PadicCtx C = PadicCtx::make(F.p, R.M);
    const uint64_t b = w.beta.v.low_u64() % R.q;
    PAdicInt::Valuation bv = w.beta.valuation(C);
    const unsigned long long tailv =
        w.beta.v.is_zero(C) ? ~0ull : (unsigned long long)T.K * bv.v;
    for (unsigned n = 0; n <= F.n_max; n++) {
      uint64_t acc = 0;
      for (unsigned m = T.K; m-- > 0;) acc = R.add(R.mul(acc, b), F.c[n].c[m]);
      unsigned long long digits = R.M > F.pguard[n] ? R.M - F.pguard[n] : 0;
      if (tailv < digits) digits = tailv;
      unsigned v = R.vp(acc);
      if (v < digits)
        pts.push_back({n, Rational((int64_t)v), PtFlag::EXACT});
      else
        pts.push_back({n, Rational((int64_t)digits), PtFlag::ATLEAST});
    }
  } else {
    std::vector<unsigned> certs(T.K);
    for (unsigned n = 0; n <= F.n_max; n++) {
      for (unsigned m = 0; m < T.K; m++) certs[m] = F.cert(n, m);
      SpecVal s = specialize_boundary(T, F.c[n], w.vbeta, certs);
      PtFlag f = s.kind == SpecVal::Kind::EXACT  ? PtFlag::EXACT
                 : s.kind == SpecVal::Kind::TIE ? PtFlag::TIE
                                                : PtFlag::ATLEAST;
      pts.push_back({n, s.v, f});
    }
  }
  return make_polygon(std::move(pts));
}

Polygon newton_center(const PadicCtx& C, const CenterSeries& cs) {
  std::vector<PolyPoint> pts;
  pts.reserve(cs.d.size());
  for (size_t n = 0; n < cs.d.size(); n++) {
    unsigned v = cs.d[n].vp(C);
    if (v < cs.Mc)
      pts.push_back({(unsigned)n, Rational((int64_t)v), PtFlag::EXACT});
    else
      pts.push_back({(unsigned)n, Rational((int64_t)cs.Mc), PtFlag::ATLEAST});
  }
  return make_polygon(std::move(pts));
}

Polygon lb_polygon(const std::vector<long>& lam, const Rational& vbeta) {
  std::vector<PolyPoint> pts;
  pts.reserve(lam.size());
  for (size_t n = 0; n < lam.size(); n++)
    pts.push_back({(unsigned)n, Rational(lam[n]) * vbeta, PtFlag::EXACT});
  return make_polygon(std::move(pts));
}

Polygon ub_polygon(unsigned p, unsigned t, const std::vector<long>& lam,
                   const Rational& vbeta) {
  const unsigned step = p * (p + 1) * t;
  std::vector<PolyPoint> pts;
  for (size_t n = 0; n < lam.size(); n += step)
    pts.push_back({(unsigned)n, Rational(lam[n]) * vbeta, PtFlag::EXACT});
  return make_polygon(std::move(pts));
}

Rational boundary_radius(unsigned p, unsigned st) {
  return Rational(8, (int64_t)st * ((int64_t)p * p - 1) + 8);
}

HaloReport halo_decompose(const FredholmSeries& F, const std::vector<Rational>& samples) {
  if (samples.empty()) throw std::invalid_argument("halo_decompose: no samples");
  const Rational radius = boundary_radius(F.p, F.st);
  for (const Rational& v : samples)
    if (!(v < radius))
      throw std::domain_error("halo_decompose: v(beta) = " + v.str() +
                              " not inside the boundary radius " + radius.str());

  struct Shape {
    Polygon poly;
    std::vector<unsigned> bps;
    std::vector<Rational> alphas;
    std::vector<bool> cert;
  };
  std::vector<Shape> shapes;
  for (const Rational& v : samples) {
    Shape s;
    s.poly = newton_at(F, WeightSpec::boundary(F.j, v));
    for (auto& [x, y] : s.poly.hull) s.bps.push_back(x);
    for (const HullSeg& g : s.poly.segs) {
      s.alphas.push_back(g.slope / v);
      s.cert.push_back(g.certified);
    }
    shapes.push_back(std::move(s));
  }

  // ratios are weight-independent on certified segments; a certified
  // disagreement cannot come from precision loss
  const Shape& s0 = shapes[0];
  for (size_t i = 1; i < shapes.size(); i++) {
    const Shape& si = shapes[i];
    const size_t lim = std::min(s0.alphas.size(), si.alphas.size());
    for (size_t g = 0; g < lim; g++) {
      if (!s0.cert[g] || !si.cert[g]) break;
      if (s0.bps[g] != si.bps[g] || s0.bps[g + 1] != si.bps[g + 1] ||
          s0.alphas[g] != si.alphas[g])
        throw std::logic_error(
            "halo decomposition unstable across certified segments at v(beta) = " +
            samples[i].str());
    }
  }

  HaloReport rep;
  rep.p = F.p;
  rep.n_max = F.n_max;
  rep.breakpoints = s0.bps;
  rep.coverage = s0.bps.empty() ? 0 : s0.bps.back() - s0.bps.front();
  for (size_t g = 0; g < s0.alphas.size(); g++) {
    bool cert = true;
    for (const Shape& s : shapes) cert = cert && g < s.cert.size() && s.cert[g];
    rep.components.push_back({s0.alphas[g], s0.bps[g + 1] - s0.bps[g], cert});
  }
  rep.stability = true;
  for (const Shape& s : shapes)
    rep.stability = rep.stability && s.bps == s0.bps && s.alphas == s0.alphas;

  const std::vector<long> lam = lambda_profile(F.p, F.st, F.n_max);
  Verdict sand = Verdict::PASS;
  for (size_t si = 0; si < shapes.size(); si++) {
    const Rational& v = samples[si];
    const Polygon& P = shapes[si].poly;
    for (const PolyPoint& pt : P.points) {
      Rational need = Rational(lam[pt.n]) * v;
      if (pt.y < need)
        sand = worse(sand, pt.flag == PtFlag::EXACT ? Verdict::FAIL
                                                    : Verdict::INCONCLUSIVE);
    }
    Polygon ub = ub_polygon(F.p, F.st / (F.p + 1), lam, v);
    if (ub.hull.size() >= 2) {
      for (const HullSeg& g : P.segs)
        for (unsigned n = g.x0; n <= g.x1; n++) {
          std::optional<Rational> top = polygon_value(ub, n);
          if (!top) break;
          Rational ours = g.y0 + g.slope * Rational((int64_t)n - (int64_t)g.x0);
          if (ours > *top)
            sand = worse(sand, g.certified ? Verdict::FAIL : Verdict::INCONCLUSIVE);
        }
    }
  }
  rep.sandwich = sand;

  // unit status of b_{n, lambda(n)} is weight-independent: one p-adic digit
  std::vector<int> unit_at(F.n_max + 1, -1);
  for (unsigned n = 0; n <= F.n_max; n++) {
    unsigned h = (unsigned)lam[n];
    if (h < F.T.K && F.cert(n, h) >= 1) {
      unit_at[n] = F.c[n].c[h] % F.p != 0;
      if (unit_at[n]) rep.units++;
      else rep.nonunits++;
    } else {
      rep.units_unknown++;
    }
  }
  Verdict dich = Verdict::PASS;
  for (size_t si = 0; si < shapes.size(); si++) {
    const Rational& v = samples[si];
    const Rational jump = std::min(v, Rational(1) - v);
    for (const PolyPoint& pt : shapes[si].poly.points) {
      Rational base = Rational(lam[pt.n]) * v;
      if (unit_at[pt.n] == 1) {
        if (pt.flag != PtFlag::EXACT) dich = worse(dich, Verdict::INCONCLUSIVE);
        else if (pt.y != base) dich = Verdict::FAIL;
      } else if (unit_at[pt.n] == 0) {
        Rational need = base + jump;
        if (pt.y < need)
          dich = worse(dich, pt.flag == PtFlag::EXACT ? Verdict::FAIL
                                                      : Verdict::INCONCLUSIVE);
      } else {
        dich = worse(dich, Verdict::INCONCLUSIVE);
      }
    }
  }
  rep.dichotomy = dich;
  rep.note = "radius " + radius.str() + ", " + std::to_string(samples.size()) +
             " samples, coverage " + std::to_string(rep.coverage) + "/" +
             std::to_string(rep.n_max);
  return rep;
}

ApReport ap_detect(const std::vector<std::pair<Rational, unsigned>>& ratios,
                   unsigned budget) {
  ApReport rep;
  rep.budget = budget;
  unsigned total = 0;
  // slopes of one component share a denominator; group before chaining
  std::map<int64_t, std::map<Rational, unsigned>> groups;
  for (const auto& [r, mult] : ratios) {
    groups[r.den][r] += mult;
    total += mult;
  }
  for (auto& [den, ms] : groups) {
    while (!ms.empty() && (unsigned)rep.progressions.size() < budget) {
      const Rational a = ms.begin()->first;
      std::vector<Rational> cands;
      unsigned scan = 0;
      for (auto it = std::next(ms.begin()); it != ms.end() && scan < 8; ++it, ++scan)
        cands.push_back(it->first - a);
      Rational best_d(0);
      unsigned best_len = ms.begin()->second;  // difference 0 takes every copy
      for (const Rational& d : cands) {
        unsigned len = 0;
        for (Rational x = a; ms.count(x); x = x + d) len++;
        if (len > best_len) {
          best_len = len;
          best_d = d;
        }
      }
      if (best_d == Rational(0)) {
        ms.erase(a);
      } else {
        Rational x = a;
        for (unsigned i = 0; i < best_len; i++, x = x + best_d) {
          auto it = ms.find(x);
          if (--it->second == 0) ms.erase(it);
        }
      }
      rep.progressions.push_back({a, best_d, best_len});
      rep.covered += best_len;
    }
  }
  rep.residual = total - rep.covered;
  return rep;
}

std::string polygon_json(const Polygon& P) {
  nlohmann::ordered_json out;
  out["schema"] = "halo-polygon/1";
  out["n_max"] = P.n_max;
  auto pts = nlohmann::ordered_json::array();
  for (const PolyPoint& pt : P.points)
    pts.push_back({{"n", pt.n}, {"y", pt.y.str()}, {"flag", flag_str(pt.flag)}});
  out["points"] = std::move(pts);
  auto hull = nlohmann::ordered_json::array();
  for (const auto& [x, y] : P.hull) hull.push_back({x, y.str()});
  out["hull"] = std::move(hull);
  auto slopes = nlohmann::ordered_json::array();
  for (size_t s = 0; s < P.segs.size(); s++)
    slopes.push_back({{"slope", P.slopes[s].first.str()},
                      {"mult", P.slopes[s].second},
                      {"certified", P.segs[s].certified}});
  out["slopes"] = std::move(slopes);
  return out.dump(2);
}

std::string polygon_csv(const Polygon& P) {
  std::string out = "slope,multiplicity,certified\n";
  for (size_t s = 0; s < P.segs.size(); s++)
    out += P.slopes[s].first.str() + "," + std::to_string(P.slopes[s].second) + "," +
           (P.segs[s].certified ? "1" : "0") + "\n";
  return out;
}

std::string halo_json(const HaloReport& R) {
  nlohmann::ordered_json out;
  out["schema"] = "halo-report/1";
  out["n_max"] = R.n_max;
  out["coverage"] = R.coverage;
  out["breakpoints"] = R.breakpoints;
  auto comps = nlohmann::ordered_json::array();
  for (const HaloComponent& c : R.components)
    comps.push_back({{"alpha", c.alpha.str()},
                     {"degree", c.degree},
                     {"interval", interval_label(c.alpha, R.p)},
                     {"certified", c.certified}});
  out["components"] = std::move(comps);
  out["stability"] = R.stability;
  out["sandwich"] = verdict_str(R.sandwich);
  out["dichotomy"] = verdict_str(R.dichotomy);
  out["units"] = R.units;
  out["nonunits"] = R.nonunits;
  out["units_unknown"] = R.units_unknown;
  out["note"] = R.note;
  return out.dump(2);
}

}  // namespace halo
