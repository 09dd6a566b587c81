// Newton polygons of specialized characteristic series, the lower/upper bound
// sandwich, the boundary halo decomposition, and slope progression detection.
//
// Polygons carry per-point flags. EXACT points pin the polygon; AT-LEAST and
// TIE points only contribute lower-bound constraints and never anchor hull
// vertices. A hull segment is certified when no constraint point at or below
// it could move the true polygon; everything downstream (component degrees,
// stability verdicts) distinguishes certified from uncertified segments.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "halo/dist.hpp"
#include "halo/spectral.hpp"
#include "halo/weight.hpp"

namespace halo {

enum class PtFlag { EXACT, ATLEAST, TIE };

struct PolyPoint {
  unsigned n = 0;
  Rational y;  // exact valuation when EXACT, else a lower bound
  PtFlag flag = PtFlag::ATLEAST;
};

struct HullSeg {
  unsigned x0 = 0, x1 = 0;
  Rational y0, y1;
  Rational slope;
  bool certified = true;
};

struct Polygon {
  unsigned n_max = 0;
  std::vector<PolyPoint> points;
  std::vector<std::pair<unsigned, Rational>> hull;  // lower-convex vertex chain
  std::vector<HullSeg> segs;
  std::vector<std::pair<Rational, unsigned>> slopes;  // nondecreasing, with multiplicity
};

// lower hull of the EXACT points; constraints decide segment certification
Polygon make_polygon(std::vector<PolyPoint> pts);

// hull value at x = n, when n lies inside the hull span
std::optional<Rational> polygon_value(const Polygon& P, unsigned n);

// slopes strictly below the cutoff, with multiplicity
std::vector<std::pair<Rational, unsigned>> slopes_below(const Polygon& P,
                                                        const Rational& cutoff);

// specialization polygon of a characteristic series; w must not be Universal.
// Center mode reads p-adic valuations of Horner values, boundary mode the
// ultrametric minimum over the T-window; certified digits come from the
// series' own per-coefficient certificate.
Polygon newton_at(const FredholmSeries& F, const WeightSpec& w);

// polygon of an exact finite-window series (coefficients mod p^Mc)
Polygon newton_center(const PadicCtx& C, const CenterSeries& cs);

// points (n, lambda(n) v), all EXACT
Polygon lb_polygon(const std::vector<long>& lam, const Rational& vbeta);

// chords through the touch grid n_k = p(p+1)kt, vertices (n_k, lambda(n_k) v)
Polygon ub_polygon(unsigned p, unsigned t, const std::vector<long>& lam,
                   const Rational& vbeta);

// largest admissible v(beta) for the boundary decomposition, as an exact rational
Rational boundary_radius(unsigned p, unsigned st);

struct HaloComponent {
  Rational alpha;       // slope / v(beta), constant across admissible samples
  unsigned degree = 0;  // x-extent of the segment
  bool certified = true;
};

struct HaloReport {
  unsigned p = 0;
  unsigned n_max = 0;
  unsigned coverage = 0;  // x-extent pinned by EXACT hulls
  std::vector<unsigned> breakpoints;
  std::vector<HaloComponent> components;
  bool stability = false;      // breakpoints and ratios coincide across samples
  Verdict sandwich = Verdict::PASS;   // LB <= polygon <= UB
  Verdict dichotomy = Verdict::PASS;  // unit criterion vs slope at each index
  unsigned units = 0, nonunits = 0, units_unknown = 0;
  std::string note;
};

// boundary decomposition over sampled v(beta), all strictly below the radius.
// Disagreement across samples inside certified segments throws: the ratios are
// weight-independent there, so instability signals a bug, not precision loss.
HaloReport halo_decompose(const FredholmSeries& F, const std::vector<Rational>& samples);

struct Progression {
  Rational start, diff;
  unsigned length = 0;
};

struct ApReport {
  std::vector<Progression> progressions;
  unsigned covered = 0, residual = 0, budget = 0;
};

// greedy cover of the ratio multiset by at most `budget` arithmetic
// progressions; a finite window can only exhibit consistency, so the result
// is labeled consistent-with and never treated as a proof
ApReport ap_detect(const std::vector<std::pair<Rational, unsigned>>& ratios,
                   unsigned budget);

std::string polygon_json(const Polygon& P);
std::string polygon_csv(const Polygon& P);
std::string halo_json(const HaloReport& R);

}  // namespace halo
