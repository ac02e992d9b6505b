#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "embedcap/prob.hpp"

namespace embedcap {

// Rate-region computation for information embedding over multiple access
// and degraded broadcast channels. Every bound expression is evaluated
// exactly for a concrete feasible tuple of conditional pmfs; regions are
// assembled by sweeping feasible tuples over conditional-pmf simplex grids
// and taking the convex hull of the per-tuple polygons (time-sharing).

enum class MacCase { A, B, C };
enum class BcCase { Ap, Bp, Cp, Dp };
enum class BoundSide { inner, outer };

// MAC embedding: two encoders observe host sequences (s1, s2) and transmit
// (x1, x2) over p(y | x1, s1, x2, s2) under per-encoder distortion budgets.
struct MacProblem {
  JointPmf host;    // axes (s1, s2)
  Kernel channel;   // inputs (x1, s1, x2, s2) -> outputs (y)
  DistortionMeasure d1;
  DistortionMeasure d2;
  double delta1 = 0.0;
  double delta2 = 0.0;
  MacCase mac_case = MacCase::C;
};

// Degraded BC embedding: one encoder embeds two messages into host s and
// transmits x; decoder 1 sees y ~ p(y|x,s), decoder 2 sees z ~ p(z|y).
struct BcProblem {
  Pmf host;         // s
  Kernel forward;   // inputs (x, s) -> outputs (y)
  Kernel degrade;   // inputs (y) -> outputs (z)
  DistortionMeasure d;
  double delta = 0.0;
  BcCase bc_case = BcCase::Cp;
};

void validate(const MacProblem& p);
void validate(const BcProblem& p);

// Product-form encoder choice: p(u_i, x_i | s_i) per encoder. The auxiliary
// axis is optional; cases whose bounds do not involve it accept kernels
// with outputs (x_i) only.
struct MacInnerTuple {
  Kernel enc1;  // (s1) -> (u1, x1) or (s1) -> (x1)
  Kernel enc2;  // (s2) -> (u2, x2) or (s2) -> (x2)
};

// Joint encoder choice p(x1, x2 | s1, s2) for the outer-bound feasible set.
struct MacOuterTuple {
  Kernel enc;  // (s1, s2) -> (x1, x2)
};

// BC encoder choice p(aux..., x | s); the auxiliary axes present depend on
// the case: (u,v) A' inner, (u,v,w) A' outer, (u) B' inner and C', (u,v)
// B' outer.
struct BcTuple {
  Kernel enc;  // (s) -> (aux..., x)
};

struct BoundTriple {
  double b1 = 0.0;
  double b2 = 0.0;
  double b12 = 0.0;   // meaningful only when has_sum
  bool has_sum = false;
};

// Full joint assembly: host x encoders x channel(s). Axis order is
// (s1, s2 [, u1], x1 [, u2], x2, y) for MAC and (s, aux..., x, y, z) for BC.
JointPmf assemble_mac_joint(const MacProblem& p, const MacInnerTuple& t);
JointPmf assemble_mac_joint(const MacProblem& p, const MacOuterTuple& t);
JointPmf assemble_bc_joint(const BcProblem& p, const BcTuple& t);

// Bound evaluators. Each validates tuple feasibility (distortion within
// budget + 1e-9) and returns the case's bound expressions in bits; values
// may be negative.
BoundTriple eval_mac_caseA(const MacInnerTuple& t, const MacProblem& p);
BoundTriple eval_mac_caseB(const MacInnerTuple& t, const MacProblem& p);
BoundTriple eval_mac_caseC(const MacInnerTuple& t, const MacProblem& p);
BoundTriple eval_mac_caseC(const MacOuterTuple& t, const MacProblem& p);
BoundTriple eval_bc_caseA_inner(const BcTuple& t, const BcProblem& p);
BoundTriple eval_bc_caseA_outer(const BcTuple& t, const BcProblem& p);
BoundTriple eval_bc_caseB_inner(const BcTuple& t, const BcProblem& p);
BoundTriple eval_bc_caseB_outer(const BcTuple& t, const BcProblem& p);
BoundTriple eval_bc_caseC(const BcTuple& t, const BcProblem& p);

// ------------------------------------------------------------------ regions

struct RatePoint {
  double r1 = 0.0;
  double r2 = 0.0;
};

struct SupportSample {
  double lambda = 0.0;
  double value = 0.0;
  RatePoint argmax;
};

struct RateRegion {
  std::vector<RatePoint> hull;          // CCW from the lexicographic minimum
  std::vector<SupportSample> supports;  // sampled from the hull
  bool empty = true;                    // no achievable point found at all
};

// Nonnegative-quadrant polygon cut out by one bound triple:
// {r >= 0 : r1 <= b1, r2 <= b2 [, r1+r2 <= b12]}. A negative individual
// bound pins that coordinate to zero; if nothing remains the tuple
// contributes no points. Bounds within 1e-9 of zero count as zero.
std::vector<RatePoint> bound_polygon(const BoundTriple& b);

RateRegion region_from_points(std::vector<RatePoint> points,
                              std::span<const double> lambdas);

double support_function(const RateRegion& r, double lambda);
bool region_contains(const RateRegion& r, RatePoint p, double tol);

// ------------------------------------------------------------------- search

struct SearchConfig {
  // Simplex grid step is 1/grid_denom; 0 selects 8 when every searched
  // kernel table has at most 256 cells and 4 otherwise.
  int grid_denom = 0;
  // Auxiliary alphabet sizes; 0 selects the per-case default cap.
  int aux1 = 0, aux2 = 0;            // MAC u1, u2
  int aux_u = 0, aux_v = 0, aux_w = 0;  // BC u, v, w
  // Exhaustive enumeration is used when the grid has at most this many
  // tuples; larger spaces fall back to seeded coordinate ascent.
  std::int64_t max_exhaustive = 2'000'000;
  std::int64_t max_row_points = 4'000'000;  // per-row grid size guard
  int restarts = 4;
  int max_sweeps = 40;
  std::vector<double> lambdas = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = EMBEDCAP_THREADS or hardware
  // Extra rate points merged before the hull; used by verification to seed
  // a region with points already proven achievable (e.g. at a smaller
  // distortion budget).
  std::vector<RatePoint> seed_points;
};

// Computes the requested bound region for the problem's case. MAC cases A
// and B admit only inner bounds. BC cases C' and D' share one capacity
// evaluator, so either side returns the same region.
RateRegion compute_region(const MacProblem& p, const SearchConfig& cfg, BoundSide side);
RateRegion compute_region(const BcProblem& p, const SearchConfig& cfg, BoundSide side);

// Single-user special cases, evaluated through the MAC engine with the
// second user degenerate (all its alphabets singletons).
double single_user_irreversible_capacity(const Pmf& host, const Kernel& fwd,
                                         const DistortionMeasure& d, double delta,
                                         const SearchConfig& cfg);
double single_user_reversible_capacity(const Pmf& host, const Kernel& fwd,
                                       const DistortionMeasure& d, double delta,
                                       const SearchConfig& cfg);

}  // namespace embedcap
