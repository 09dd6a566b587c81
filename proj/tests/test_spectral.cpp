#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <json.hpp>

#include "halo/manin.hpp"
#include "halo/spectral.hpp"
#include "halo/weight.hpp"

using namespace halo;

namespace {

// reference run at N=4: p=3, window Dd=10 (S=40), coefficients mod 3^24, T^14.
// c_n[m] mod 3^12 for n <= 8, m <= 9, frozen from an independent implementation.
constexpr uint64_t FROZEN_Q = 531441;  // 3^12
constexpr uint64_t FROZEN_C[9][10] = {
    {1, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {354297, 452709, 319302, 163296, 500094, 434727, 54351, 134703, 516099, 107065},
    {400611, 410052, 218652, 418524, 502941, 336498, 134226, 233217, 203382, 503995},
    {226871, 442008, 411279, 82799, 461028, 362418, 86740, 36336, 323343, 195826},
    {218370, 61893, 479763, 133272, 3015, 138141, 391107, 147978, 160728, 264668},
    {531198, 108186, 371451, 187038, 190998, 469206, 299826, 326727, 18153, 500894},
    {260604, 284229, 40440, 530452, 106143, 217485, 439848, 436077, 330360, 277340},
    {100278, 214974, 212949, 305148, 365949, 484695, 88119, 388647, 484326, 178968},
    {138510, 30699, 217323, 390258, 80484, 232671, 183786, 113562, 226458, 127689}};
constexpr unsigned FROZEN_GUARDS[13] = {0, 0, 0, 1, 1, 1, 2, 2, 2, 4, 4, 4, 5};

struct ProtoRun {
  Domain D;
  UpTable tab;
  TsRing T;
  UpMatrix U;
  FredholmSeries F;  // traces route, n_max = 12
};

const ProtoRun& proto_run() {
  static ProtoRun r = [] {
    ProtoRun run{build_domain(4), {}, TsRing::make(3, 24, 14), {}, {}};
    finish_domain(run.D);
    run.tab = up_table(run.D, 3);
    run.U = assemble_up(run.T, run.tab, 0, 10);
    run.F = fredholm_via_traces(run.U, 12);
    return run;
  }();
  return r;
}

}  // namespace

TEST_CASE("certified window arithmetic") {
  // minor certificate: J digits of the n-th coefficient from an S x S window
  CHECK(certified_J(3, 4, 40) == 6);
  CHECK(certified_J(3, 4, 48) == 8);
  CHECK(certified_J(3, 88, 528) == 4);
  CHECK(certified_J(3, 88, 264) == 2);
  CHECK(minor_for(3, 4, 6) == 36);
  CHECK(certified_J(3, 4, minor_for(3, 4, 6)) == 6);
  CHECK(certified_J(3, 88, minor_for(3, 88, 4)) == 4);
  // the coarser configuration rule used to pick run sizes
  CHECK(sizing_heuristic(3, 4, 12, 6) == 56);
  CHECK(sizing_heuristic(3, 88, 40, 4) == 176);
}

TEST_CASE("lambda profile and closed form") {
  std::vector<long> lam = lambda_profile(3, 4, 12);
  std::vector<long> want = {0, 0, 0, 0, 0, 1, 2, 3, 4, 6, 8, 10, 12};
  CHECK(lam == want);
  CHECK(lambda_closed_form(3, 1, 1) == 12);
  CHECK(lam[12] == lambda_closed_form(3, 1, 1));
  // second vertex and the reference level
  CHECK(lambda_profile(3, 4, 24)[24] == lambda_closed_form(3, 1, 2));
  CHECK(lambda_profile(3, 88, 264)[264] == lambda_closed_form(3, 22, 1));
  CHECK(lambda_closed_form(3, 22, 1) == 264);
}

TEST_CASE("assembled window satisfies the row estimate") {
  const ProtoRun& r = proto_run();
  CHECK(r.U.S == 40);
  CHECK(r.U.st == 4);
  CHECK(r.U.assembled.fail == 0);
  CHECK(r.U.assembled.pass + r.U.assembled.inconclusive == 40 * 40);
  // every required decay is visible at this precision
  CHECK(r.U.assembled.inconclusive == 0);
}

TEST_CASE("trace route reproduces the frozen coefficients") {
  const FredholmSeries& F = proto_run().F;
  CHECK(F.J == 6);
  REQUIRE(F.pguard.size() == 13);
  for (unsigned n = 0; n <= 12; n++) CHECK(F.pguard[n] == FROZEN_GUARDS[n]);
  // c_0 = 1 exactly
  CHECK(F.c[0].c[0] == 1);
  for (unsigned m = 1; m < 14; m++) CHECK(F.c[0].c[m] == 0);
  // c_1 = -tr(G)
  const UpMatrix& U = proto_run().U;
  TSeries tr = TSeries::zero(U.T);
  for (size_t i = 0; i < U.S; i++) tr = ts_add(U.T, tr, U.at(i, i));
  CHECK(F.c[1].c == ts_neg(U.T, tr).c);
  for (unsigned n = 0; n <= 8; n++)
    for (unsigned m = 0; m <= 9; m++) {
      INFO("n=", n, " m=", m);
      CHECK(F.c[n].c[m] % FROZEN_Q == FROZEN_C[n][m]);
    }
}

TEST_CASE("coefficient valuations meet the lambda floor") {
  BoundCheck bc = lambda_bound_check(proto_run().F);
  CHECK(bc.fail == 0);
  CHECK(bc.inconclusive == 0);
  // one term per (n, m) with m < lambda(n) <= K
  CHECK(bc.pass == 46);
}

TEST_CASE("berkowitz route agrees with traces on certified digits") {
  const ProtoRun& r = proto_run();
  FredholmSeries Fb = fredholm(r.U, 12);
  CHECK(Fb.pguard == std::vector<unsigned>(13, 0));
  for (unsigned n = 0; n <= 12; n++) {
    unsigned digits = 24 - r.F.pguard[n];
    for (unsigned m = 0; m < 14; m++) {
      uint64_t d = r.T.R.sub(Fb.c[n].c[m], r.F.c[n].c[m]);
      INFO("n=", n, " m=", m);
      CHECK(r.T.R.vp(d) >= digits);
    }
  }
}

TEST_CASE("window refinement is stable below the certified minor") {
  const ProtoRun& r = proto_run();
  UpMatrix U2 = assemble_up(r.T, r.tab, 0, 12);
  CHECK(U2.S == 48);
  FredholmSeries F2 = fredholm_via_traces(U2, 12);
  CHECK(F2.J == 8);
  StabilityReport rep = stability_check(r.F, F2);
  CHECK(rep.J == 6);
  CHECK(rep.ok);
  if (rep.min_diff_val) CHECK(*rep.min_diff_val >= 6);
}

TEST_CASE("specializing the window commutes with specializing the series") {
  const ProtoRun& r = proto_run();
  PadicCtx C = PadicCtx::make(3, 24);
  CHECK(beta_center(C, 1, 24).v.low_u64() == 140759261931ull);
  SpecializeReport s0 = specialize_check(r.U, r.F, 0);
  CHECK(s0.ok);
  CHECK(s0.digits == 19);  // M minus the worst trace-route guard
  SpecializeReport s1 = specialize_check(r.U, r.F, 1);
  CHECK(s1.ok);
  CHECK(s1.digits == 9);  // K v(beta_1) = 14 minus the worst guard
}

TEST_CASE("window too small for the requested degree") {
  const ProtoRun& r = proto_run();
  CHECK_THROWS_AS((void)fredholm(r.U, 41), TruncationError);
  CHECK_THROWS_AS((void)fredholm_via_traces(r.U, 41), TruncationError);
  CHECK_NOTHROW((void)fredholm(r.U, 40));
}

TEST_CASE("scalar berkowitz variants agree") {
  SmallRing R = SmallRing::make(3, 10);
  PadicCtx C = PadicCtx::make(3, 10);
  std::mt19937_64 rng(7);
  const size_t S = 6;
  std::vector<uint64_t> G(S * S);
  for (auto& g : G) g = rng() % R.q;
  std::vector<uint64_t> a = berkowitz_fredholm_u64(R, G, S, S);
  std::vector<Zw> Gz(S * S);
  for (size_t i = 0; i < S * S; i++) Gz[i] = Zw::from_u64(C, G[i]);
  std::vector<Zw> b = berkowitz_fredholm_zw(C, Gz, S, S);
  REQUIRE(a.size() == S + 1);
  REQUIRE(b.size() == S + 1);
  CHECK(a[0] == 1);
  for (size_t n = 0; n <= S; n++) CHECK(b[n].low_u64() == a[n]);
}

TEST_CASE("center series matches the universal series at the center") {
  const ProtoRun& r = proto_run();
  PadicCtx C = PadicCtx::make(3, 24);
  // k = 0: the center matrix is the T = 0 limit of the universal window,
  // so the two characteristic series agree exactly
  CenterSeries c0 = center_fredholm(C, r.tab, 0, 0, 10);
  CHECK(c0.S == 40);
  CHECK(c0.J == 6);
  FredholmSeries Fb = fredholm(r.U, 12);
  for (unsigned n = 0; n <= 12; n++) CHECK(c0.d[n].low_u64() == Fb.c[n].c[0]);
  // k = 2: the full-precision center entries agree with the universal entries
  // at T = beta_2 up to the T^K tail, v(beta_2) = 1
  CenterSeries c2 = center_fredholm(C, r.tab, 0, 2, 10);
  uint64_t b2 = beta_center(C, 2, 24).v.low_u64();
  const SmallRing& R = r.T.R;
  auto horner = [&](const TSeries& s) {
    uint64_t acc = 0;
    for (unsigned m = r.T.K; m-- > 0;) acc = R.add(R.mul(acc, b2), s.c[m]);
    return acc;
  };
  std::vector<uint64_t> Gs(r.U.S * r.U.S);
  for (size_t i = 0; i < Gs.size(); i++) Gs[i] = horner(r.U.G[i]);
  std::vector<uint64_t> spec = berkowitz_fredholm_u64(R, Gs, r.U.S, 12);
  for (unsigned n = 0; n <= 12; n++) {
    Zw diff = c2.d[n].sub(C, Zw::from_u64(C, spec[n]));
    INFO("n=", n);
    CHECK(diff.vp(C) >= 14);
  }
}

TEST_CASE("json export round-trips") {
  const FredholmSeries& F = proto_run().F;
  nlohmann::json j = nlohmann::json::parse(fredholm_json(F));
  CHECK(j["schema"] == "halo-fredholm/1");
  CHECK(j["p"] == 3);
  CHECK(j["st"] == 4);
  CHECK(j["S"] == 40);
  CHECK(j["J"] == 6);
  CHECK(j["n_max"] == 12);
  REQUIRE(j["coeffs"].size() == 13);
  auto& c0 = j["coeffs"][0];
  CHECK(c0["n"] == 0);
  REQUIRE(c0["terms"].size() == 6);  // cert(0, m) > 0 only for m < J
  CHECK(c0["terms"][0]["b"] == "1");
  CHECK(c0["terms"][0]["digits"] == 6);
  // certified value is the residue mod p^digits
  auto& t1 = j["coeffs"][1]["terms"][0];
  unsigned digits = t1["digits"];
  CHECK(digits == 6);
  CHECK(std::stoull(t1["b"].get<std::string>()) ==
        F.c[1].c[0] % proto_run().T.R.pe[digits]);
}
