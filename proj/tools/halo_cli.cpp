// Batch CLI over the engine: domain construction, U_p series, polygons,
// boundary decomposition, exact classical slopes, and the acceptance battery.
// Outputs are deterministic (stable key order, decimal strings, exact
// rationals "a/b"); the up-table is cached on disk when --cache-dir is given.
#include <CLI11.hpp>
#include <json.hpp>
#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "acceptance_suite.hpp"
#include "halo/classical.hpp"
#include "halo/manin.hpp"
#include "halo/newton.hpp"
#include "halo/padic.hpp"
#include "halo/spectral.hpp"
#include "halo/weight.hpp"

using nlohmann::ordered_json;

namespace {

struct RunConfig {
  unsigned p = 3;
  int64_t l = 11;
  unsigned j = 0;      // --component
  unsigned M = 8;      // --prec-p, target digits before guards
  unsigned K = 48;     // --prec-t
  unsigned n_max = 40;
  std::vector<std::string> beta_raw;
  std::vector<halo::Rational> betas;
  int k = 0;
  std::string eps = "trivial";
  std::string out = "json";
  std::string cache_dir;
  unsigned jobs = 1;
};

bool is_prime(int64_t n) {
  if (n < 2) return false;
  for (int64_t d = 2; d * d <= n; d++)
    if (n % d == 0) return false;
  return true;
}

// working p-digits: target + trace guards v_p(n_max!) + 2
unsigned work_digits(const RunConfig& c) {
  return c.M + halo::vp_factorial(c.p, c.n_max) + 2;
}

bool pow_fits_u62(unsigned p, unsigned e) {
  uint64_t q = 1;
  for (unsigned i = 0; i < e; i++) {
    if (q > (uint64_t(1) << 62) / p) return false;
    q *= p;
  }
  return true;
}

// empty on success, otherwise the failing invariant by name
std::string validate(RunConfig& c) {
  if (c.p == 2 || !is_prime(c.p)) return "--p must be an odd prime";
  if (!is_prime(c.l)) return "--l must be prime";
  if (c.l % 12 != 11)
    return "--l must be congruent to 11 mod 12 (got " + std::to_string(c.l) +
           " = " + std::to_string(c.l % 12) + " mod 12); this keeps level l^2 torsion-free";
  if ((int64_t)c.p == c.l) return "--p and --l must be distinct";
  if (c.j + 1 >= c.p) return "--component must lie in [0, p-2]";
  if (c.M < 1) return "--prec-p must be at least 1";
  if (c.K < 1 || c.K > 64) return "--prec-t must lie in [1, 64] (series kernel cap)";
  if (c.n_max < 1) return "--nmax must be at least 1";
  if (!pow_fits_u62(c.p, work_digits(c)))
    return "--prec-p too large: p^(M + guards) = p^" + std::to_string(work_digits(c)) +
           " overflows the 64-bit coefficient ring";
  if (c.k < 0 || c.k > 8) return "--k must lie in [0, 8] (desk-scale cap)";
  if (c.jobs < 1) return "--jobs must be at least 1";
  for (const std::string& braw : c.beta_raw) {
    long long a = 0, b = 0;
    char tail = 0;
    if (std::sscanf(braw.c_str(), "%lld/%lld%c", &a, &b, &tail) != 2 || a <= 0 ||
        b <= 0 || a >= b)
      return "--beta expects an exact rational a/b strictly between 0 and 1, got '" +
             braw + "'";
    c.betas.push_back(halo::Rational(a, b));
  }
  return "";
}

struct TableBundle {
  int64_t N = 0;
  int t = 0;
  unsigned st = 0;
  halo::UpTable tab;
};

std::string hex_hash(const std::string& s) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << std::hash<std::string>{}(s);
  return os.str();
}

ordered_json table_payload(const TableBundle& tb, unsigned p, int64_t l) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : tb.tab) {
    ordered_json terms = ordered_json::array();
    for (const halo::UpTerm& t : row)
      terms.push_back(
          {{"m", {t.mu.a, t.mu.b, t.mu.c, t.mu.d}}, {"s", t.s}, {"i", t.idx}});
    rows.push_back(terms);
  }
  return ordered_json{{"schema", "halo-uptable/1"}, {"p", p},       {"l", l},
                      {"N", tb.N},                  {"t", tb.t},    {"st", tb.st},
                      {"rows", rows}};
}

std::filesystem::path cache_path(const RunConfig& c) {
  return std::filesystem::path(c.cache_dir) /
         ("uptable-p" + std::to_string(c.p) + "-l" + std::to_string(c.l) + ".json");
}

bool load_table(const RunConfig& c, TableBundle& tb) {
  std::ifstream in(cache_path(c));
  if (!in) return false;
  ordered_json j;
  try {
    in >> j;
  } catch (...) {
    return false;
  }
  if (!j.is_object() || j.value("schema", "") != "halo-uptable/1" ||
      !j.contains("hash") || !j.contains("rows"))
    return false;
  const std::string want = j["hash"];
  j.erase("hash");
  if (hex_hash(j.dump()) != want) return false;  // stale or corrupted: rebuild
  if (j["p"] != c.p || j["l"] != c.l) return false;
  tb.N = j["N"];
  tb.t = j["t"];
  tb.st = j["st"];
  tb.tab.clear();
  try {
    for (const auto& row : j["rows"]) {
      std::vector<halo::UpTerm> terms;
      for (const auto& t : row) {
        halo::UpTerm u;
        u.mu = halo::Mat22{t["m"][0], t["m"][1], t["m"][2], t["m"][3]};
        u.s = t["s"];
        u.idx = t["i"];
        terms.push_back(u);
      }
      tb.tab.push_back(std::move(terms));
    }
  } catch (...) {
    return false;
  }
  return tb.tab.size() == tb.st;
}

void save_table(const RunConfig& c, const TableBundle& tb) {
  std::error_code ec;
  std::filesystem::create_directories(c.cache_dir, ec);
  ordered_json j = table_payload(tb, c.p, c.l);
  j["hash"] = hex_hash(j.dump());  // hash of the payload without the hash field
  std::filesystem::path tmp = cache_path(c);
  tmp += ".tmp-" + std::to_string((long)::getpid());
  {
    std::ofstream out(tmp);
    out << j.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, cache_path(c), ec);  // atomic publish
  if (ec) std::filesystem::remove(tmp, ec);
}

TableBundle ensure_table(const RunConfig& c) {
  TableBundle tb;
  if (!c.cache_dir.empty() && load_table(c, tb)) return tb;
  halo::Domain D = halo::build_domain(c.l * c.l);
  halo::finish_domain(D);
  tb.N = D.N;
  tb.t = D.t;
  tb.tab = halo::up_table(D, c.p);
  tb.st = (unsigned)tb.tab.size();
  if (!c.cache_dir.empty()) save_table(c, tb);
  return tb;
}

struct SeriesBundle {
  TableBundle tb;
  halo::UpMatrix U;
  halo::FredholmSeries F;
  unsigned Dd = 0;
  unsigned Mw = 0;
};

unsigned sized_Dd(unsigned p, unsigned st, unsigned n_max) {
  unsigned Dd = (p * (n_max + 8) + st - 1) / st;
  return Dd ? Dd : 1;
}

SeriesBundle make_series(const RunConfig& c) {
  SeriesBundle sb;
  sb.tb = ensure_table(c);
  sb.Dd = sized_Dd(c.p, sb.tb.st, c.n_max);
  sb.Mw = work_digits(c);
  halo::TsRing T = halo::TsRing::make(c.p, sb.Mw, c.K);
  sb.U = halo::assemble_up(T, sb.tb.tab, c.j, sb.Dd);
  sb.F = halo::fredholm(sb.U, c.n_max);  // TruncationError names the needed columns
  return sb;
}

ordered_json config_json(const RunConfig& c, const SeriesBundle* sb) {
  ordered_json j{{"p", c.p},      {"l", c.l},      {"component", c.j},
                 {"prec_p", c.M}, {"prec_t", c.K}, {"n_max", c.n_max}};
  if (sb) {
    j["st"] = sb->tb.st;
    j["Dd"] = sb->Dd;
    j["S"] = sb->U.S;
    j["work_digits"] = sb->Mw;
  }
  return j;
}

void emit(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

int cmd_domain(const RunConfig& c) {
  halo::Domain D = halo::build_domain(c.l * c.l);
  std::string vertex = "PASS", relation = "PASS", note;
  size_t gens = 0;
  try {
    gens = halo::free_generators(D).size();
  } catch (const halo::UnsupportedLevel& e) {
    note = e.what();
    if (note.find("relation") != std::string::npos)
      relation = "FAIL";
    else
      vertex = "FAIL";
  }
  if (vertex == "PASS" && relation == "PASS" && !halo::manin_relation_check(D))
    relation = "FAIL";
  const bool ok = vertex == "PASS" && relation == "PASS";
  if (c.out == "csv") {
    std::cout << "key,value\nN," << D.N << "\ncosets," << D.mu << "\ntriangles,"
              << D.tris.size() << "\nt," << D.t << "\ngenerators," << gens
              << "\nmanin_relation," << relation << "\nvertex_check," << vertex << "\n";
  } else {
    ordered_json j{{"schema", "halo-domain/1"},
                   {"p", c.p},
                   {"l", c.l},
                   {"N", D.N},
                   {"cosets", D.mu},
                   {"triangles", D.tris.size()},
                   {"t", D.t},
                   {"generators", gens},
                   {"manin_relation", relation},
                   {"vertex_check", vertex}};
    if (!note.empty()) j["note"] = note;
    emit(j);
  }
  return ok ? 0 : 1;
}

int cmd_fredholm(const RunConfig& c) {
  SeriesBundle sb = make_series(c);
  halo::BoundCheck bc = halo::lambda_bound_check(sb.F);
  if (c.out == "csv") {
    std::cout << "n,m,digits,b\n";
    for (unsigned n = 0; n <= sb.F.n_max; n++)
      for (unsigned m = 0; m < sb.F.T.K; m++) {
        const unsigned dg = sb.F.cert(n, m);
        if (!dg) continue;
        std::cout << n << "," << m << "," << dg << ","
                  << (sb.F.c[n].c[m] % sb.F.T.R.pe[dg]) << "\n";
      }
  } else {
    ordered_json j{{"schema", "halo-fredholm-run/1"}, {"config", config_json(c, &sb)}};
    j["certification"] = {
        {"J", sb.F.J},
        {"route", "berkowitz"},
        {"note", "T^m digit counts certified to min(J - m, work digits)"}};
    j["assembled"] = {{"pass", sb.U.assembled.pass},
                      {"inconclusive", sb.U.assembled.inconclusive},
                      {"fail", sb.U.assembled.fail}};
    j["lambda_floor"] = {
        {"pass", bc.pass}, {"inconclusive", bc.inconclusive}, {"fail", bc.fail}};
    j["series"] = ordered_json::parse(halo::fredholm_json(sb.F));
    emit(j);
  }
  return (bc.fail == 0 && sb.U.assembled.fail == 0) ? 0 : 1;
}

int cmd_newton(const RunConfig& c) {
  if (!c.betas.empty()) {
    SeriesBundle sb = make_series(c);
    if (c.out == "csv") {
      if (c.betas.size() != 1) {
        std::cerr << "error: csv output takes a single --beta; use json for batches\n";
        return 2;
      }
      halo::Polygon P =
          halo::newton_at(sb.F, halo::WeightSpec::boundary(c.j, c.betas[0]));
      std::cout << halo::polygon_csv(P);
      return 0;
    }
    ordered_json polys = ordered_json::array();
    for (const halo::Rational& b : c.betas) {
      halo::Polygon P = halo::newton_at(sb.F, halo::WeightSpec::boundary(c.j, b));
      polys.push_back({{"beta", b.str()},
                       {"polygon", ordered_json::parse(halo::polygon_json(P))}});
    }
    emit(ordered_json{{"schema", "halo-newton-run/1"},
                      {"config", config_json(c, &sb)},
                      {"mode", "boundary"},
                      {"polygons", polys}});
    return 0;
  }
  // no --beta: polygon of the center-specialized series at weight k
  TableBundle tb = ensure_table(c);
  const unsigned Dd = sized_Dd(c.p, tb.st, c.n_max);
  const unsigned Mc = 96;
  halo::PadicCtx C = halo::PadicCtx::make(c.p, Mc);
  halo::CenterSeries cs = halo::center_fredholm(C, tb.tab, c.j, c.k, Dd);
  halo::Polygon P = halo::newton_center(C, cs);
  if (c.out == "csv") {
    std::cout << halo::polygon_csv(P);
    return 0;
  }
  ordered_json j{{"schema", "halo-newton-run/1"},
                 {"config", config_json(c, nullptr)},
                 {"mode", "center"},
                 {"k", c.k},
                 {"Mc", Mc},
                 {"Dd", Dd},
                 {"S", cs.S},
                 {"polygon", ordered_json::parse(halo::polygon_json(P))}};
  emit(j);
  return 0;
}

int cmd_halo(const RunConfig& c) {
  if (c.betas.empty()) {
    std::cerr << "error: halo needs at least one --beta sample\n";
    return 2;
  }
  SeriesBundle sb = make_series(c);
  halo::HaloReport rep = halo::halo_decompose(sb.F, c.betas);
  if (c.out == "csv") {
    std::cout << "alpha,degree,certified\n";
    for (const auto& comp : rep.components)
      std::cout << comp.alpha.str() << "," << comp.degree << ","
                << (comp.certified ? 1 : 0) << "\n";
  } else {
    emit(ordered_json{{"schema", "halo-run/1"},
                      {"config", config_json(c, &sb)},
                      {"report", ordered_json::parse(halo::halo_json(rep))}});
  }
  return 0;
}

int cmd_classical(const RunConfig& c) {
  halo::EpsChar eps{c.p, c.eps == "quadratic" ? (int)(c.p - 1) / 2 : 0};
  halo::ClassicalSpace cs = halo::classical_up(c.p, c.l, c.k, eps);
  std::vector<halo::Rational> slopes =
      cs.dim ? halo::up_slopes(cs.up, c.p) : std::vector<halo::Rational>{};
  std::vector<std::pair<std::string, unsigned>> grouped;
  for (const halo::Rational& s : slopes) {
    if (!grouped.empty() && grouped.back().first == s.str())
      grouped.back().second++;
    else
      grouped.push_back({s.str(), 1});
  }
  int rc = 0;
  std::string al_status, al_note;
  if (eps.quadratic()) {
    halo::ALReport al = halo::atkin_lehner_check(c.p, c.l, c.k, eps);
    al_status = al.status == halo::ALReport::Status::OK        ? "OK"
                : al.status == halo::ALReport::Status::VACUOUS ? "VACUOUS"
                                                               : "FAIL";
    al_note = al.note;
    if (al.status == halo::ALReport::Status::FAIL) rc = 1;
  }
  if (c.out == "csv") {
    std::cout << "slope,multiplicity\n";
    for (const auto& [s, m] : grouped) std::cout << s << "," << m << "\n";
  } else {
    ordered_json sj = ordered_json::array();
    for (const auto& [s, m] : grouped) sj.push_back({{"slope", s}, {"mult", m}});
    ordered_json j{{"schema", "halo-classical-run/1"},
                   {"config", {{"p", c.p}, {"l", c.l}, {"k", c.k}, {"eps", c.eps}}},
                   {"dim", cs.dim},
                   {"slopes", sj}};
    if (!al_status.empty()) j["al"] = {{"status", al_status}, {"note", al_note}};
    emit(j);
  }
  return rc;
}

int cmd_verify_all(const RunConfig& c, bool extended) {
  if (c.p != 3 || c.l != 11) {
    std::cerr << "error: the acceptance battery is pinned to p = 3, l = 11 (its "
                 "frozen oracles are specific to that configuration)\n";
    return 2;
  }
  if (const char* env = std::getenv("HALO_EXTENDED"))
    if (*env && std::strcmp(env, "0") != 0) extended = true;
  auto rows = halo::run_acceptance(extended);
  std::cout << halo::acceptance_table(rows);
  return halo::acceptance_ok(rows) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"exact p-adic slope computations on partial modular symbols"};
  app.require_subcommand(1);
  app.add_option("--p", cfg.p, "odd prime p");
  app.add_option("--l", cfg.l, "auxiliary prime, 11 mod 12; the level is l^2");
  app.add_option("--component", cfg.j, "character component j (omega^j)");
  app.add_option("--prec-p", cfg.M, "target p-digit precision (guards added internally)");
  app.add_option("--prec-t", cfg.K, "T-adic window length");
  app.add_option("--nmax", cfg.n_max, "series degree cap");
  app.add_option("--beta", cfg.beta_raw,
                 "boundary valuation v(beta) as a/b in (0,1); repeatable");
  app.add_option("--k", cfg.k, "classical weight k");
  app.add_option("--eps", cfg.eps, "character: trivial or quadratic")
      ->check(CLI::IsMember({"trivial", "quadratic"}));
  app.add_option("--out", cfg.out, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--cache-dir", cfg.cache_dir,
                 "up-table cache directory (content-hashed, atomic writes)");
  app.add_option("--jobs", cfg.jobs,
                 "worker cap; commands are single-process, accepted for compatibility");

  bool extended = false;
  auto* sc_domain =
      app.add_subcommand("domain", "build the level-l^2 domain and run its checks");
  auto* sc_fred =
      app.add_subcommand("fredholm", "assemble U_p and emit the characteristic series");
  auto* sc_newton = app.add_subcommand(
      "newton", "specialization polygons (boundary --beta or center --k)");
  auto* sc_halo = app.add_subcommand("halo", "boundary decomposition over --beta samples");
  auto* sc_classical =
      app.add_subcommand("classical", "exact classical U_p slopes at weight k");
  auto* sc_verify =
      app.add_subcommand("verify-all", "full acceptance battery (p = 3, l = 11)");
  sc_verify->add_flag("--extended", extended, "include the long touching-point row");
  for (auto* sc : {sc_domain, sc_fred, sc_newton, sc_halo, sc_classical, sc_verify})
    sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const std::string bad = validate(cfg);
  if (!bad.empty()) {
    std::cerr << "error: " << bad << "\n";
    return 2;
  }

  try {
    if (sc_domain->parsed()) return cmd_domain(cfg);
    if (sc_fred->parsed()) return cmd_fredholm(cfg);
    if (sc_newton->parsed()) return cmd_newton(cfg);
    if (sc_halo->parsed()) return cmd_halo(cfg);
    if (sc_classical->parsed()) return cmd_classical(cfg);
    if (sc_verify->parsed()) return cmd_verify_all(cfg, extended);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
