#include "acceptance_suite.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "halo/classical.hpp"
#include "halo/dist.hpp"
#include "halo/manin.hpp"
#include "halo/newton.hpp"
#include "halo/padic.hpp"
#include "halo/spectral.hpp"
#include "halo/weight.hpp"

namespace halo {
namespace {

constexpr unsigned P = 3;
constexpr int64_t L = 11;

// expensive artifacts, built once on first use and shared across rows
struct Shared {
  Domain D121;  // level 121, finished
  UpTable tab121;
  bool ref = false;

  UpMatrix U;  // 176 x 176 over T(3, 28, 48): 8 target digits + v_3(40!) + 2
  bool up = false;

  FredholmSeries F40;  // reference series, n <= 40
  bool f40 = false;

  // small torsion-free level 4 (st = 4): the boundary window where the
  // coefficient floor is nonvacuous inside n <= 12
  FredholmSeries Fsm;  // 80 x 80 over T(3, 24, 14), J = 13
  bool small = false;

  HaloReport href, hsm;
  bool halos = false;
};

void ensure_ref(Shared& S) {
  if (S.ref) return;
  S.D121 = build_domain(L * L);
  finish_domain(S.D121);
  S.tab121 = up_table(S.D121, P);
  S.ref = true;
}

void ensure_up(Shared& S) {
  if (S.up) return;
  ensure_ref(S);
  TsRing T = TsRing::make(P, 28, 48);
  S.U = assemble_up(T, S.tab121, 0, 2);  // S = 176, sized for n_max = 40
  S.up = true;
}

void ensure_f40(Shared& S) {
  if (S.f40) return;
  ensure_up(S);
  S.F40 = fredholm(S.U, 40);
  S.f40 = true;
}

void ensure_small(Shared& S) {
  if (S.small) return;
  Domain D4 = build_domain(4);
  finish_domain(D4);
  UpTable tab4 = up_table(D4, P);
  TsRing T = TsRing::make(P, 24, 14);
  // Dd = 20 gives J = 13: one certified digit at the deepest minimizer (n = 12)
  UpMatrix U4 = assemble_up(T, tab4, 0, 20);
  S.Fsm = fredholm(U4, 12);
  S.small = true;
}

Mat22 random_sigma0(std::mt19937_64& rng, bool lower) {
  std::uniform_int_distribution<int64_t> small(-6, 6);
  for (;;) {
    Mat22 g{small(rng), small(rng), 3 * small(rng), small(rng)};
    if (lower) g.d *= 3;
    if (in_sigma0(P, g) && (!lower || in_lower_monoid(P, g))) return g;
  }
}

std::string ratio_str(const std::vector<std::pair<Rational, unsigned>>& rs) {
  std::string out = "{";
  for (size_t i = 0; i < rs.size(); i++) {
    if (i) out += ", ";
    out += rs[i].first.str() + " x" + std::to_string(rs[i].second);
  }
  return out + "}";
}

std::vector<Rational> flat(const std::vector<std::pair<Rational, unsigned>>& rs) {
  std::vector<Rational> out;
  for (const auto& [v, m] : rs)
    for (unsigned i = 0; i < m; i++) out.push_back(v);
  return out;
}

std::string verdict_word(Verdict v) {
  return v == Verdict::PASS ? "PASS" : v == Verdict::FAIL ? "FAIL" : "INCONCLUSIVE";
}

CriterionResult run_one(const std::string& name, double budget_s,
                        const std::function<void(CriterionResult&)>& body) {
  CriterionResult r{name, "FAIL", "", 0.0};
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.verdict = "FAIL";
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && r.seconds > budget_s && r.verdict == "PASS") {
    r.verdict = "FAIL";
    r.detail += " [exceeded the " + std::to_string((long)budget_s) + "s budget]";
  }
  return r;
}

void c_domain_reference(Shared& S, CriterionResult& r) {
  ensure_ref(S);
  // free_generators re-runs the vertex check and the relation; throws on failure
  auto gens = free_generators(S.D121);
  bool ok = S.D121.mu == 132 && S.D121.tris.size() == 44 && S.D121.t == 22 &&
            gens.size() == 22;
  std::ostringstream d;
  d << "level 121: cosets " << S.D121.mu << " (132 expected), triangles "
    << S.D121.tris.size() << " (132/3), free generators " << gens.size()
    << ", relation ok, vertex check ok";
  r.verdict = ok ? "PASS" : "FAIL";
  r.detail = d.str();
}

void c_domain_small(Shared&, CriterionResult& r) {
  Domain D = build_domain(11);
  std::set<std::set<Cusp>> got;
  for (const Mat22& g : D.tris)
    got.insert({cusp_of(g.b, g.d), cusp_of(g.a, g.c), cusp_of(g.a + g.b, g.c + g.d)});
  const std::set<std::set<Cusp>> want{
      {Cusp{0, 1}, Cusp{1, 0}, Cusp{1, 1}},
      {Cusp{0, 1}, Cusp{1, 1}, Cusp{1, 2}},
      {Cusp{0, 1}, Cusp{1, 2}, Cusp{1, 3}},
      {Cusp{1, 2}, Cusp{1, 1}, Cusp{2, 3}},
  };
  bool ok = D.tris.size() == 4 && got == want;
  r.verdict = ok ? "PASS" : "FAIL";
  r.detail = ok ? "level 11: the four triangles match the known vertex sets "
                  "{0,oo,1} {0,1,1/2} {0,1/2,1/3} {1/2,1,2/3}"
                : "level 11 triangle multiset differs from the known domain";
}

void c_divisor_roundtrip(Shared& S, CriterionResult& r) {
  ensure_ref(S);
  std::mt19937_64 rng(20260815);
  int done = 0;
  for (int trial = 0; trial < 200; trial++) {
    Divisor div;
    int npts = 1 + (int)(rng() % 4);
    std::vector<Cusp> pts;
    while ((int)pts.size() < 2 * npts) {
      int64_t den = (int64_t)(rng() % 1000000) + 1;
      int64_t num = (int64_t)(rng() % 2000001) - 1000000;
      Cusp c = cusp_of(num, den);
      if (cusp_in_inf_orbit(c, S.D121.N)) continue;
      pts.push_back(c);
    }
    for (int k = 0; k < npts; k++) {
      div[pts[2 * k]] += 1;
      div[pts[2 * k + 1]] -= 1;
    }
    std::erase_if(div, [](const auto& kv) { return kv.second == 0; });
    Word w = express_divisor(S.D121, div);
    if (eval_word(S.D121, w) != div) {
      r.verdict = "FAIL";
      r.detail = "round-trip mismatch at trial " + std::to_string(trial);
      return;
    }
    done++;
  }
  r.verdict = "PASS";
  r.detail = std::to_string(done) + "/200 random degree-0 divisors (heights <= 1e6) "
                                    "satisfied evaluate(express(d)) = d exactly";
}

void c_entry_decay(Shared& S, CriterionResult& r) {
  ensure_up(S);
  TsRing T8 = TsRing::make(P, 8, 30);
  std::mt19937_64 rng(20260815);
  VerdictTally rt;
  for (int it = 0; it < 20; it++) {
    Mat22 g = random_sigma0(rng, it % 2 == 0);
    // a certified bound violation throws from act_matrix and fails the row
    ActMatrix A = act_matrix(T8, g, it % 2, 24, 24);
    VerdictTally t = tally(A.verdicts);
    rt.pass += t.pass;
    rt.inconclusive += t.inconclusive;
    rt.fail += t.fail;
  }
  bool ok = rt.fail == 0 && S.U.assembled.fail == 0;
  std::ostringstream d;
  d << "20 random monoid elements (alternating sharp/plain regime, 24x24 entries): pass "
    << rt.pass << ", inconclusive " << rt.inconclusive << ", fail " << rt.fail
    << "; assembled 176x176 row estimates: pass " << S.U.assembled.pass
    << ", inconclusive " << S.U.assembled.inconclusive << ", fail "
    << S.U.assembled.fail;
  r.verdict = ok ? "PASS" : "FAIL";
  r.detail = d.str();
}

void c_lambda_floor(Shared& S, CriterionResult& r) {
  ensure_f40(S);
  ensure_small(S);
  BoundCheck ref = lambda_bound_check(S.F40);
  BoundCheck sm = lambda_bound_check(S.Fsm);
  auto lam = lambda_profile(P, 88, 264);
  long closed = lambda_closed_form(P, 22, 1);  // (p-1)p(p+1)t/2 at k = 1
  bool ok = ref.fail == 0 && sm.fail == 0 && sm.pass > 0 && lam[264] == closed &&
            closed == 264;
  std::ostringstream d;
  d << "reference n <= 40: fail " << ref.fail
    << " (floor vacuous there: lambda = 0 below n = 89 at st = 88); st = 4 window: pass "
    << sm.pass << ", fail " << sm.fail << " (nonvacuous); lambda(264) by recurrence = "
    << lam[264] << " = closed form " << closed;
  r.verdict = ok ? "PASS" : "FAIL";
  r.detail = d.str();
}

void c_specialize_commutes(Shared& S, CriterionResult& r) {
  ensure_f40(S);
  // degree cap 20: the low coefficients of the same series
  FredholmSeries F20 = S.F40;
  F20.n_max = 20;
  F20.c.resize(21);
  F20.pguard.resize(21);
  SpecializeReport s0 = specialize_check(S.U, F20, 0);
  SpecializeReport s1 = specialize_check(S.U, F20, 1);
  bool ok = s0.ok && s1.ok;
  std::ostringstream d;
  d << "charpoly of the specialized window vs specialized series, n <= 20: k = 0 agrees to "
    << s0.digits << " digits, k = 1 to " << s1.digits << " digits";
  if (!s0.ok) d << "; k = 0: " << s0.note;
  if (!s1.ok) d << "; k = 1: " << s1.note;
  r.verdict = ok ? "PASS" : "FAIL";
  r.detail = d.str();
}

void c_control(Shared& S, CriterionResult& r) {
  ensure_ref(S);
  PadicCtx C0 = PadicCtx::make(P, 128);
  CenterSeries a0 = center_fredholm(C0, S.tab121, 0, 0, 2);
  CenterSeries b0 = center_fredholm(C0, S.tab121, 0, 0, 3);
  auto oc0 = slopes_below(newton_center(C0, a0), Rational(1));
  auto oc0b = slopes_below(newton_center(C0, b0), Rational(1));
  ControlReport ctl0 = control_check(P, L, 0, flat(oc0));

  PadicCtx C1 = PadicCtx::make(P, 96);
  CenterSeries a1 = center_fredholm(C1, S.tab121, 0, 1, 3);
  CenterSeries b1 = center_fredholm(C1, S.tab121, 0, 1, 4);
  auto oc1 = slopes_below(newton_center(C1, a1), Rational(2));
  auto oc1b = slopes_below(newton_center(C1, b1), Rational(2));
  ControlReport ctl1 = control_check(P, L, 1, flat(oc1));

  bool ok = ctl0.ok && ctl1.ok && oc0 == oc0b && oc1 == oc1b;
  std::ostringstream d;
  d << "k = 0: slopes < 1 " << ratio_str(oc0) << (ctl0.ok ? " == classical" : " MISMATCH")
    << ", stable under 176 -> 264 columns; k = 1: slopes < 2 " << ratio_str(oc1)
    << (ctl1.ok ? " == classical" : " MISMATCH") << ", stable under 264 -> 352";
  if (!ctl0.ok) d << "; " << ctl0.note;
  if (!ctl1.ok) d << "; " << ctl1.note;
  r.verdict = ok ? "PASS" : "FAIL";
  r.detail = d.str();
}

void c_al_pairing(Shared&, CriterionResult& r) {
  EpsChar quad{P, 1};
  ALReport ref = atkin_lehner_check(P, L, 0, quad);
  ALReport live = atkin_lehner_check(P, L, 1, quad);
  auto count = [](const std::vector<Rational>& v, int64_t s) {
    return std::count(v.begin(), v.end(), Rational(s));
  };
  long m0 = count(live.slopes_eps, 0), m2 = count(live.slopes_eps, 2);
  bool ok = ref.status == ALReport::Status::VACUOUS &&
            live.status == ALReport::Status::OK && live.dim == 176 && m0 == 66 &&
            m2 == 66;
  std::ostringstream d;
  d << "k = 0 quadratic is parity-dead at p = 3 (chi(-1) = -1, space is zero): the "
       "pairing a_i + a_{d-1-i} = 1 and the equal-multiplicity claim hold vacuously; "
       "live analog k = 1 quadratic: dim "
    << live.dim << ", a_i + a_{175-i} = 2 exact, slope multiplicities 0 x" << m0
    << " / 2 x" << m2 << " symmetric";
  if (ref.status != ALReport::Status::VACUOUS) d << "; k = 0 status not vacuous: " << ref.note;
  if (live.status != ALReport::Status::OK) d << "; k = 1: " << live.note;
  r.verdict = ok ? "PASS" : "FAIL";
  r.detail = d.str();
}

void c_halo_window(Shared& S, CriterionResult& r) {
  ensure_f40(S);
  ensure_small(S);
  // the three listed samples sit above the st = 88 radius 1/89; the runtime
  // validation must refuse them
  bool refused = false;
  try {
    halo_decompose(S.F40, {Rational(1, 7), Rational(1, 11), Rational(2, 15)});
  } catch (const std::domain_error&) {
    refused = true;
  }
  S.href = halo_decompose(S.F40, {Rational(1, 90), Rational(1, 97), Rational(2, 181)});
  S.hsm = halo_decompose(S.Fsm, {Rational(1, 7), Rational(1, 11), Rational(2, 15)});
  S.halos = true;

  bool rok = S.href.stability && S.href.sandwich != Verdict::FAIL &&
             S.href.dichotomy != Verdict::FAIL;
  const std::vector<unsigned> wantbp{0, 3, 9, 12};
  bool sok = S.hsm.stability && S.hsm.breakpoints == wantbp &&
             S.hsm.sandwich == Verdict::PASS && S.hsm.dichotomy == Verdict::PASS &&
             S.hsm.components.size() == 3;
  if (sok) {
    const Rational wanta[3] = {Rational(0), Rational(1), Rational(2)};
    const unsigned wantd[3] = {3, 6, 3};
    for (size_t i = 0; i < 3; i++)
      sok = sok && S.hsm.components[i].alpha == wanta[i] &&
            S.hsm.components[i].degree == wantd[i] && S.hsm.components[i].certified;
  }
  std::ostringstream d;
  auto comp_str = [](const HaloReport& h) {
    std::string out = "{";
    for (size_t i = 0; i < h.components.size(); i++) {
      if (i) out += ", ";
      out += h.components[i].alpha.str() + " x" + std::to_string(h.components[i].degree);
      if (!h.components[i].certified) out += "?";
    }
    return out + "}";
  };
  d << "st = 88 radius is 1/89: listed samples 1/7, 1/11, 2/15 "
    << (refused ? "refused at runtime" : "NOT refused") << "; resampled at 1/90, 1/97, 2/181: ratios "
    << comp_str(S.href) << ", sandwich " << verdict_word(S.href.sandwich) << ", dichotomy "
    << verdict_word(S.href.dichotomy) << ", breakpoints stable; st = 4 window admits the "
    << "listed samples: breakpoints [0,3,9,12], ratios " << comp_str(S.hsm)
    << " certified, sandwich " << verdict_word(S.hsm.sandwich) << ", dichotomy "
    << verdict_word(S.hsm.dichotomy);
  r.verdict = (refused && rok && sok) ? "PASS" : "FAIL";
  r.detail = d.str();
}

void c_slope_progressions(Shared& S, CriterionResult& r) {
  if (!S.halos) {
    r.verdict = "INCONCLUSIVE";
    r.detail = "halo reports unavailable (halo-window row did not complete)";
    return;
  }
  auto ratios = [](const HaloReport& h) {
    std::vector<std::pair<Rational, unsigned>> out;
    for (const auto& c : h.components) out.push_back({c.alpha, c.degree});
    return out;
  };
  ApReport ar = ap_detect(ratios(S.href), (P - 1) * 88);
  ApReport as = ap_detect(ratios(S.hsm), (P - 1) * 4);
  bool ok = ar.residual == 0 && as.residual == 0;
  std::ostringstream d;
  d << "reference window: " << ar.progressions.size() << " progression(s) cover "
    << ar.covered << " ratios (budget " << ar.budget << ", residual " << ar.residual
    << "); st = 4 window: " << as.progressions.size() << " cover " << as.covered
    << " (budget " << as.budget << ", residual " << as.residual
    << "); consistency at this window size, not a proof";
  r.verdict = ok ? "PASS" : "FAIL";
  r.detail = d.str();
}

void c_touching(Shared& S, bool extended, CriterionResult& r) {
  if (!extended) {
    r.verdict = "SKIPPED";
    r.detail = "needs the series to degree n_1 = p(p+1)t = 264 at the reference level; "
               "set HALO_EXTENDED=1 (or pass --extended) for the gated report";
    return;
  }
  ensure_small(S);
  // toy window t = 1: the same touching at v(beta) = 1/(p-1) = 1/2, where
  // n_1 = 12 and the polygon must pass through (12, lambda(12)/2) = (12, 6)
  Polygon P12 = newton_at(S.Fsm, WeightSpec::boundary(0, Rational(1, 2)));
  auto val = polygon_value(P12, 12);
  Rational sum(0);
  for (const auto& [sl, mult] : P12.slopes) sum = sum + sl * Rational((int64_t)mult);
  bool exact = false;
  for (const auto& pt : P12.points)
    if (pt.n == 12) exact = pt.flag == PtFlag::EXACT;
  bool toy = val.has_value() && *val == Rational(6) && sum == Rational(6) && exact;
  std::ostringstream d;
  d << "reference touch at n_1 = 264 is out of range for this engine: it needs T-degree "
       "265 (series kernels cap at 64), boundary minima of valuation lambda(264)/2 = 132 "
       "(the u64 coefficient ring caps at 39 base-3 digits), and a certified degree-264 "
       "window (~3.5e4 columns); toy window t = 1 exhibits the touching: polygon at "
       "v(beta) = 1/2 passes through (12, 6) "
    << (toy ? "exactly" : "FAILED") << ", slope sum 6 = lambda(12)/2 = p(p+1)t/2 "
    << "(the slope sum to n_1 equals lambda(n_1) v(beta), i.e. p(p+1)t/2, half of p(p+1)t)";
  r.verdict = toy ? "INCONCLUSIVE" : "FAIL";
  r.detail = d.str();
}

}  // namespace

std::vector<CriterionResult> run_acceptance(bool extended) {
  Shared S;
  std::vector<CriterionResult> rows;
  auto add = [&](const std::string& name, double budget,
                 const std::function<void(CriterionResult&)>& body) {
    rows.push_back(run_one(name, budget, body));
  };
  add("domain-reference", 60, [&](CriterionResult& r) { c_domain_reference(S, r); });
  add("domain-small", 1, [&](CriterionResult& r) { c_domain_small(S, r); });
  add("divisor-roundtrip", 60, [&](CriterionResult& r) { c_divisor_roundtrip(S, r); });
  add("entry-decay", 600, [&](CriterionResult& r) { c_entry_decay(S, r); });
  add("lambda-floor", 3600, [&](CriterionResult& r) { c_lambda_floor(S, r); });
  add("specialize-commutes", 1800,
      [&](CriterionResult& r) { c_specialize_commutes(S, r); });
  add("control", 1800, [&](CriterionResult& r) { c_control(S, r); });
  add("al-pairing", 600, [&](CriterionResult& r) { c_al_pairing(S, r); });
  add("halo-window", 1200, [&](CriterionResult& r) { c_halo_window(S, r); });
  add("slope-progressions", 1, [&](CriterionResult& r) { c_slope_progressions(S, r); });
  add("touching", 0, [&](CriterionResult& r) { c_touching(S, extended, r); });
  return rows;
}

std::string acceptance_table(const std::vector<CriterionResult>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(21) << "criterion" << std::setw(15) << "verdict"
     << std::right << std::setw(8) << "seconds" << "  detail\n";
  os << std::string(96, '-') << "\n";
  size_t pass = 0, fail = 0, inc = 0, skip = 0;
  for (const auto& r : rows) {
    os << std::left << std::setw(21) << r.name << std::setw(15) << r.verdict
       << std::right << std::setw(8) << std::fixed << std::setprecision(2) << r.seconds
       << "  " << r.detail << "\n";
    if (r.verdict == "PASS") pass++;
    else if (r.verdict == "FAIL") fail++;
    else if (r.verdict == "INCONCLUSIVE") inc++;
    else skip++;
  }
  os << "\n" << pass << " PASS, " << fail << " FAIL, " << inc << " INCONCLUSIVE, "
     << skip << " SKIPPED\n";
  return os.str();
}

bool acceptance_ok(const std::vector<CriterionResult>& rows) {
  return std::none_of(rows.begin(), rows.end(),
                      [](const CriterionResult& r) { return r.verdict == "FAIL"; });
}

}  // namespace halo
