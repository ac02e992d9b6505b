#include "embedcap/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "embedcap/parallel.hpp"
#include "embedcap/rng.hpp"

namespace embedcap {

namespace {

constexpr double kFeasTol = 1e-9;   // distortion admission slack
constexpr double kZeroTol = 1e-9;   // bounds within this of zero count as zero
constexpr double kHullTol = 1e-9;   // collinearity pruning in the hull

using Names = std::vector<std::string>;

std::uint32_t mask_of(const JointPmf& j, const Names& names) {
  std::uint32_t m = 0;
  for (const auto& n : names) m |= 1u << j.axis_index(n);
  return m;
}

// ------------------------------------------------------------- validation

void check_axis(const Alphabet& got, const std::string& name, const char* where) {
  if (got.name != name)
    throw SpecError(std::string(where) + ": expected axis '" + name + "', got '" +
                    got.name + "'");
}

}  // namespace

void validate(const MacProblem& p) {
  if (p.host.rank() != 2) throw SpecError("MAC host joint must have axes (s1, s2)");
  check_axis(p.host.axes()[0], "s1", "MAC host");
  check_axis(p.host.axes()[1], "s2", "MAC host");
  if (p.channel.inputs().size() != 4 || p.channel.outputs().size() != 1)
    throw SpecError("MAC channel must map (x1, s1, x2, s2) to (y)");
  check_axis(p.channel.inputs()[0], "x1", "MAC channel");
  check_axis(p.channel.inputs()[1], "s1", "MAC channel");
  check_axis(p.channel.inputs()[2], "x2", "MAC channel");
  check_axis(p.channel.inputs()[3], "s2", "MAC channel");
  check_axis(p.channel.outputs()[0], "y", "MAC channel");
  if (!(p.channel.inputs()[1] == p.host.axes()[0]) ||
      !(p.channel.inputs()[3] == p.host.axes()[1]))
    throw SpecError("MAC channel host axes disagree with the host joint");
  if (!(p.d1.host_alphabet == p.host.axes()[0]) ||
      !(p.d1.embed_alphabet == p.channel.inputs()[0]))
    throw SpecError("distortion 1 alphabets disagree with the problem");
  if (!(p.d2.host_alphabet == p.host.axes()[1]) ||
      !(p.d2.embed_alphabet == p.channel.inputs()[2]))
    throw SpecError("distortion 2 alphabets disagree with the problem");
  if (p.delta1 < 0 || p.delta2 < 0) throw SpecError("distortion budgets must be >= 0");
}

void validate(const BcProblem& p) {
  check_axis(p.host.alphabet(), "s", "BC host");
  if (p.forward.inputs().size() != 2 || p.forward.outputs().size() != 1)
    throw SpecError("BC forward channel must map (x, s) to (y)");
  check_axis(p.forward.inputs()[0], "x", "BC forward channel");
  check_axis(p.forward.inputs()[1], "s", "BC forward channel");
  check_axis(p.forward.outputs()[0], "y", "BC forward channel");
  if (!(p.forward.inputs()[1] == p.host.alphabet()))
    throw SpecError("BC forward channel host axis disagrees with the host pmf");
  if (p.degrade.inputs().size() != 1 || p.degrade.outputs().size() != 1)
    throw SpecError("BC degrade channel must map (y) to (z)");
  check_axis(p.degrade.inputs()[0], "y", "BC degrade channel");
  check_axis(p.degrade.outputs()[0], "z", "BC degrade channel");
  if (!(p.degrade.inputs()[0] == p.forward.outputs()[0]))
    throw SpecError("BC degrade input axis disagrees with the forward output");
  if (!(p.d.host_alphabet == p.host.alphabet()) ||
      !(p.d.embed_alphabet == p.forward.inputs()[0]))
    throw SpecError("BC distortion alphabets disagree with the problem");
  if (p.delta < 0) throw SpecError("distortion budget must be >= 0");
}

// --------------------------------------------------------------- assembly

namespace {

void check_enc_shape(const Kernel& enc, const std::string& s_name,
                     const std::string& x_name) {
  if (enc.inputs().size() != 1 || enc.inputs()[0].name != s_name)
    throw SpecError("encoder kernel must condition on (" + s_name + ")");
  if (enc.outputs().empty() || enc.outputs().back().name != x_name)
    throw SpecError("encoder kernel must emit '" + x_name + "' as its last output");
}

bool has_aux(const Kernel& enc) { return enc.outputs().size() > 1; }

// Expected per-encoder distortion of an inner tuple, straight from the
// encoder rows (cheaper than assembling the full joint).
double enc_distortion(const Kernel& enc, std::span<const double> host_marginal,
                      const DistortionMeasure& d) {
  const int x_size = enc.outputs().back().size;
  double acc = 0.0;
  for (std::int64_t s = 0; s < enc.rows(); ++s) {
    auto row = enc.row(s);
    double row_acc = 0.0;
    for (std::int64_t c = 0; c < enc.row_cells(); ++c)
      row_acc += row[c] * d.at(static_cast<int>(s), static_cast<int>(c % x_size));
    acc += host_marginal[static_cast<std::size_t>(s)] * row_acc;
  }
  return acc;
}

std::vector<double> host_marginal_of(const JointPmf& host, int axis) {
  const int n0 = host.axes()[0].size, n1 = host.axes()[1].size;
  std::vector<double> m(static_cast<std::size_t>(axis == 0 ? n0 : n1), 0.0);
  for (int a = 0; a < n0; ++a)
    for (int b = 0; b < n1; ++b) {
      const int idx[2] = {a, b};
      m[static_cast<std::size_t>(axis == 0 ? a : b)] += host.at(idx);
    }
  return m;
}

struct MacDistortion {
  double d1 = 0.0, d2 = 0.0;
};

MacDistortion tuple_distortion(const MacProblem& p, const MacInnerTuple& t) {
  auto m1 = host_marginal_of(p.host, 0);
  auto m2 = host_marginal_of(p.host, 1);
  return {enc_distortion(t.enc1, m1, p.d1), enc_distortion(t.enc2, m2, p.d2)};
}

MacDistortion tuple_distortion(const MacProblem& p, const MacOuterTuple& t) {
  const int x1 = t.enc.outputs()[0].size, x2 = t.enc.outputs()[1].size;
  MacDistortion out;
  for (std::int64_t r = 0; r < t.enc.rows(); ++r) {
    const int s1 = static_cast<int>(r / p.host.axes()[1].size);
    const int s2 = static_cast<int>(r % p.host.axes()[1].size);
    const int idx[2] = {s1, s2};
    const double ps = p.host.at(idx);
    auto row = t.enc.row(r);
    for (std::int64_t c = 0; c < t.enc.row_cells(); ++c) {
      out.d1 += ps * row[c] * p.d1.at(s1, static_cast<int>(c / x2));
      out.d2 += ps * row[c] * p.d2.at(s2, static_cast<int>(c % x2));
    }
  }
  (void)x1;
  return out;
}

double bc_tuple_distortion(const BcProblem& p, const BcTuple& t) {
  const int x_size = t.enc.outputs().back().size;
  double acc = 0.0;
  for (std::int64_t s = 0; s < t.enc.rows(); ++s) {
    auto row = t.enc.row(s);
    double row_acc = 0.0;
    for (std::int64_t c = 0; c < t.enc.row_cells(); ++c)
      row_acc += row[c] * p.d.at(static_cast<int>(s), static_cast<int>(c % x_size));
    acc += p.host[static_cast<int>(s)] * row_acc;
  }
  return acc;
}

void require_feasible(double got, double budget, const char* which) {
  if (got > budget + kFeasTol)
    throw SpecError(std::string("infeasible tuple: expected distortion ") +
                    which + " exceeds the budget");
}

}  // namespace

JointPmf assemble_mac_joint(const MacProblem& p, const MacInnerTuple& t) {
  check_enc_shape(t.enc1, "s1", "x1");
  check_enc_shape(t.enc2, "s2", "x2");
  JointPmf j = chain(p.host, t.enc1);
  j = chain(j, t.enc2);
  return chain(j, p.channel);
}

JointPmf assemble_mac_joint(const MacProblem& p, const MacOuterTuple& t) {
  if (t.enc.inputs().size() != 2 || t.enc.outputs().size() != 2)
    throw SpecError("outer tuple kernel must map (s1, s2) to (x1, x2)");
  JointPmf j = chain(p.host, t.enc);
  return chain(j, p.channel);
}

JointPmf assemble_bc_joint(const BcProblem& p, const BcTuple& t) {
  check_enc_shape(t.enc, "s", "x");
  JointPmf j = chain(JointPmf::from_pmf(p.host), t.enc);
  j = chain(j, p.forward);
  return chain(j, p.degrade);
}

// -------------------------------------------------------------- evaluators

namespace {

// All MAC bound expressions, computed over the assembled joint.
BoundTriple mac_bounds(InfoCalc& c, const JointPmf& j, MacCase mc) {
  const auto m = [&](std::initializer_list<const char*> names) {
    std::uint32_t mask = 0;
    for (const char* n : names) mask |= 1u << j.axis_index(n);
    return mask;
  };
  BoundTriple out;
  out.has_sum = true;
  const std::uint32_t s1 = m({"s1"}), s2 = m({"s2"}), y = m({"y"});
  switch (mc) {
    case MacCase::A: {
      const std::uint32_t u1 = m({"u1"}), u2 = m({"u2"});
      out.b1 = c.I(u1, u2 | y) - c.I(u1, s1);
      out.b2 = c.I(u2, u1 | y) - c.I(u2, s2);
      out.b12 = c.I(u1 | u2, y) - c.I(u1 | u2, s1 | s2);
      break;
    }
    case MacCase::B: {
      const std::uint32_t u1 = m({"u1"}), x2s2 = m({"x2", "s2"});
      out.b1 = c.I(u1, y, x2s2) - c.I(u1, s1, x2s2);
      out.b2 = c.I(x2s2, y, u1) - (c.H(s2 | u1) - c.H(u1));
      out.b12 = c.I(u1 | x2s2, y) - c.H(s2) - c.I(u1, s1, x2s2);
      break;
    }
    case MacCase::C: {
      const std::uint32_t x1s1 = m({"x1", "s1"}), x2s2 = m({"x2", "s2"});
      out.b1 = c.I(x1s1, y, x2s2) - (c.H(s1 | s2) - c.H(s2));
      out.b2 = c.I(x2s2, y, x1s1) - (c.H(s1 | s2) - c.H(s1));
      out.b12 = c.I(x1s1 | x2s2, y) - c.H(s1 | s2);
      break;
    }
  }
  return out;
}

BoundTriple bc_bounds(InfoCalc& c, const JointPmf& j, BcCase bc, BoundSide side) {
  const auto m = [&](std::initializer_list<const char*> names) {
    std::uint32_t mask = 0;
    for (const char* n : names) mask |= 1u << j.axis_index(n);
    return mask;
  };
  BoundTriple out;
  const std::uint32_t s = m({"s"}), x = m({"x"}), y = m({"y"}), z = m({"z"});
  switch (bc) {
    case BcCase::Ap:
      if (side == BoundSide::inner) {
        const std::uint32_t u = m({"u"}), v = m({"v"});
        out.b1 = c.I(v, y, u) - c.I(v, s, u);
        out.b2 = c.I(u, z) - c.I(u, s);
      } else {
        const std::uint32_t u = m({"u"}), v = m({"v"}), w = m({"w"});
        out.b1 = c.I(v, y, u | w) - c.I(v, s, u | w);
        out.b2 = c.I(u, z) - c.I(u, s);
        out.b12 = c.I(u | v | w, y) - c.I(u | v | w, s);
        out.has_sum = true;
      }
      break;
    case BcCase::Bp: {
      const std::uint32_t u = m({"u"});
      out.b1 = c.I(x | s, y, u) - (c.H(s | u) - c.H(u));
      if (side == BoundSide::inner) {
        out.b2 = c.I(u, z) - c.I(u, s);
      } else {
        const std::uint32_t v = m({"v"});
        out.b2 = c.I(u | v, z) - c.I(u | v, s);
      }
      break;
    }
    case BcCase::Cp:
    case BcCase::Dp: {
      const std::uint32_t u = m({"u"});
      out.b1 = c.I(x, y, u | s);
      out.b2 = c.I(x | s, z) - c.H(s);
      break;
    }
  }
  return out;
}

void require_aux(const Kernel& enc, std::initializer_list<const char*> names) {
  std::size_t want = names.size() + 1;
  if (enc.outputs().size() != want)
    throw SpecError("tuple kernel has the wrong auxiliary axes for this case");
  std::size_t i = 0;
  for (const char* n : names) {
    if (enc.outputs()[i].name != n)
      throw SpecError(std::string("tuple kernel: expected auxiliary axis '") + n +
                      "' at position " + std::to_string(i));
    ++i;
  }
}

}  // namespace

BoundTriple eval_mac_caseA(const MacInnerTuple& t, const MacProblem& p) {
  require_aux(t.enc1, {"u1"});
  require_aux(t.enc2, {"u2"});
  auto dist = tuple_distortion(p, t);
  require_feasible(dist.d1, p.delta1, "d1");
  require_feasible(dist.d2, p.delta2, "d2");
  JointPmf j = assemble_mac_joint(p, t);
  InfoCalc c(j);
  return mac_bounds(c, j, MacCase::A);
}

BoundTriple eval_mac_caseB(const MacInnerTuple& t, const MacProblem& p) {
  require_aux(t.enc1, {"u1"});
  if (has_aux(t.enc2)) throw SpecError("case B tuple: encoder 2 carries no auxiliary");
  auto dist = tuple_distortion(p, t);
  require_feasible(dist.d1, p.delta1, "d1");
  require_feasible(dist.d2, p.delta2, "d2");
  JointPmf j = assemble_mac_joint(p, t);
  InfoCalc c(j);
  return mac_bounds(c, j, MacCase::B);
}

BoundTriple eval_mac_caseC(const MacInnerTuple& t, const MacProblem& p) {
  auto dist = tuple_distortion(p, t);
  require_feasible(dist.d1, p.delta1, "d1");
  require_feasible(dist.d2, p.delta2, "d2");
  JointPmf j = assemble_mac_joint(p, t);
  InfoCalc c(j);
  return mac_bounds(c, j, MacCase::C);
}

BoundTriple eval_mac_caseC(const MacOuterTuple& t, const MacProblem& p) {
  auto dist = tuple_distortion(p, t);
  require_feasible(dist.d1, p.delta1, "d1");
  require_feasible(dist.d2, p.delta2, "d2");
  JointPmf j = assemble_mac_joint(p, t);
  InfoCalc c(j);
  return mac_bounds(c, j, MacCase::C);
}

BoundTriple eval_bc_caseA_inner(const BcTuple& t, const BcProblem& p) {
  require_aux(t.enc, {"u", "v"});
  require_feasible(bc_tuple_distortion(p, t), p.delta, "d");
  JointPmf j = assemble_bc_joint(p, t);
  InfoCalc c(j);
  return bc_bounds(c, j, BcCase::Ap, BoundSide::inner);
}

BoundTriple eval_bc_caseA_outer(const BcTuple& t, const BcProblem& p) {
  require_aux(t.enc, {"u", "v", "w"});
  require_feasible(bc_tuple_distortion(p, t), p.delta, "d");
  JointPmf j = assemble_bc_joint(p, t);
  InfoCalc c(j);
  return bc_bounds(c, j, BcCase::Ap, BoundSide::outer);
}

BoundTriple eval_bc_caseB_inner(const BcTuple& t, const BcProblem& p) {
  require_aux(t.enc, {"u"});
  require_feasible(bc_tuple_distortion(p, t), p.delta, "d");
  JointPmf j = assemble_bc_joint(p, t);
  InfoCalc c(j);
  return bc_bounds(c, j, BcCase::Bp, BoundSide::inner);
}

BoundTriple eval_bc_caseB_outer(const BcTuple& t, const BcProblem& p) {
  require_aux(t.enc, {"u", "v"});
  require_feasible(bc_tuple_distortion(p, t), p.delta, "d");
  JointPmf j = assemble_bc_joint(p, t);
  InfoCalc c(j);
  return bc_bounds(c, j, BcCase::Bp, BoundSide::outer);
}

BoundTriple eval_bc_caseC(const BcTuple& t, const BcProblem& p) {
  require_aux(t.enc, {"u"});
  require_feasible(bc_tuple_distortion(p, t), p.delta, "d");
  JointPmf j = assemble_bc_joint(p, t);
  InfoCalc c(j);
  return bc_bounds(c, j, BcCase::Cp, BoundSide::inner);
}

// ------------------------------------------------------------------ hull

std::vector<RatePoint> bound_polygon(const BoundTriple& bin) {
  const auto snap = [](double v) { return (v < 0.0 && v >= -kZeroTol) ? 0.0 : v; };
  const double b1 = snap(bin.b1);
  const double b2 = snap(bin.b2);
  const double b12 = bin.has_sum ? snap(bin.b12)
                                 : std::numeric_limits<double>::infinity();
  std::vector<RatePoint> out;
  if (b12 < 0.0) return out;
  if (b1 < 0.0 && b2 < 0.0) return out;
  if (b1 < 0.0) {
    const double top = std::min(b2, b12);
    out.push_back({0.0, 0.0});
    if (top > 0.0) out.push_back({0.0, top});
    return out;
  }
  if (b2 < 0.0) {
    const double right = std::min(b1, b12);
    out.push_back({0.0, 0.0});
    if (right > 0.0) out.push_back({right, 0.0});
    return out;
  }
  // all bounds nonnegative: clipped rectangle / pentagon
  out.push_back({0.0, 0.0});
  out.push_back({std::min(b1, b12), 0.0});
  out.push_back({0.0, std::min(b2, b12)});
  if (b1 + b2 <= b12) {
    out.push_back({b1, b2});
  } else {
    // corner vertices exist only while the sum bound stays above the
    // individual bound; otherwise the axis intercepts already cover them
    if (b12 >= b1) out.push_back({b1, b12 - b1});
    if (b12 >= b2) out.push_back({b12 - b2, b2});
  }
  return out;
}

namespace {

double cross(const RatePoint& o, const RatePoint& a, const RatePoint& b) {
  return (a.r1 - o.r1) * (b.r2 - o.r2) - (a.r2 - o.r2) * (b.r1 - o.r1);
}

// Monotone chain; returns CCW hull starting at the lexicographic minimum,
// collinear points pruned.
std::vector<RatePoint> convex_hull(std::vector<RatePoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const RatePoint& a, const RatePoint& b) {
    return a.r1 < b.r1 || (a.r1 == b.r1 && a.r2 < b.r2);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const RatePoint& a, const RatePoint& b) {
                          return a.r1 == b.r1 && a.r2 == b.r2;
                        }),
            pts.end());
  const int n = static_cast<int>(pts.size());
  if (n <= 2) return pts;
  std::vector<RatePoint> h(2 * static_cast<std::size_t>(n));
  int k = 0;
  for (int i = 0; i < n; ++i) {  // lower
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= kHullTol) --k;
    h[k++] = pts[i];
  }
  for (int i = n - 2, lower = k + 1; i >= 0; --i) {  // upper
    while (k >= lower && cross(h[k - 2], h[k - 1], pts[i]) <= kHullTol) --k;
    h[k++] = pts[i];
  }
  h.resize(static_cast<std::size_t>(k - 1));
  return h;
}

}  // namespace

RateRegion region_from_points(std::vector<RatePoint> points,
                              std::span<const double> lambdas) {
  RateRegion r;
  if (points.empty()) {
    r.empty = true;
    return r;
  }
  r.empty = false;
  r.hull = convex_hull(std::move(points));
  for (double l : lambdas) {
    SupportSample s;
    s.lambda = l;
    s.value = -std::numeric_limits<double>::infinity();
    for (const auto& v : r.hull) {
      const double val = l * v.r1 + (1.0 - l) * v.r2;
      if (val > s.value) {
        s.value = val;
        s.argmax = v;
      }
    }
    r.supports.push_back(s);
  }
  return r;
}

double support_function(const RateRegion& r, double lambda) {
  if (r.empty) throw SpecError("support_function: empty region");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : r.hull) best = std::max(best, lambda * v.r1 + (1.0 - lambda) * v.r2);
  return best;
}

bool region_contains(const RateRegion& r, RatePoint p, double tol) {
  if (r.empty || r.hull.empty()) return false;
  const auto& h = r.hull;
  if (h.size() == 1)
    return std::abs(p.r1 - h[0].r1) <= tol && std::abs(p.r2 - h[0].r2) <= tol;
  if (h.size() == 2) {
    // distance from segment
    const double vx = h[1].r1 - h[0].r1, vy = h[1].r2 - h[0].r2;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((p.r1 - h[0].r1) * vx + (p.r2 - h[0].r2) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = p.r1 - (h[0].r1 + t * vx), dy = p.r2 - (h[0].r2 + t * vy);
    return std::sqrt(dx * dx + dy * dy) <= tol;
  }
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto& a = h[i];
    const auto& b = h[(i + 1) % h.size()];
    if (cross(a, b, p) < -tol) return false;
  }
  return true;
}

// ------------------------------------------------------------------ search

namespace {

// Number of compositions of denom into cells parts, saturating at cap.
std::int64_t composition_count(int denom, int cells, std::int64_t cap) {
  // C(denom + cells - 1, cells - 1), built incrementally
  double v = 1.0;
  for (int i = 1; i <= cells - 1; ++i) {
    v *= static_cast<double>(denom + i) / i;
    if (v > static_cast<double>(cap)) return cap + 1;
  }
  return static_cast<std::int64_t>(v + 0.5);
}

// All compositions of `denom` into `cells` parts, as probability rows.
class SimplexGrid {
 public:
  SimplexGrid(int cells, int denom, std::int64_t max_points) : cells_(cells) {
    if (composition_count(denom, cells, max_points) > max_points)
      throw BudgetError("simplex grid exceeds the per-row point budget; "
                        "reduce auxiliary sizes or coarsen the grid");
    std::vector<int> comp(static_cast<std::size_t>(cells), 0);
    emit(comp, 0, denom, max_points);
  }

  std::int64_t count() const {
    return static_cast<std::int64_t>(rows_.size() / static_cast<std::size_t>(cells_));
  }
  std::span<const double> row(std::int64_t i) const {
    return std::span<const double>(rows_.data() + i * cells_, static_cast<std::size_t>(cells_));
  }

 private:
  void emit(std::vector<int>& comp, int pos, int remaining, std::int64_t max_points) {
    if (pos == static_cast<int>(comp.size()) - 1) {
      comp[static_cast<std::size_t>(pos)] = remaining;
      if (count() >= max_points)
        throw BudgetError("simplex grid exceeds the per-row point budget; "
                          "reduce auxiliary sizes or coarsen the grid");
      double total = 0.0;
      for (int v : comp) total += v;
      for (int v : comp) rows_.push_back(static_cast<double>(v) / total);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      comp[static_cast<std::size_t>(pos)] = v;
      emit(comp, pos + 1, remaining - v, max_points);
    }
  }

  int cells_;
  std::vector<double> rows_;
};

// One row of one searched kernel.
struct RowSlot {
  int kernel;  // index into the tuple's kernel list
  std::int64_t row;
  const SimplexGrid* grid;
};

struct KernelShape {
  std::vector<Alphabet> inputs;
  std::vector<Alphabet> outputs;
};

// Generic description of a searched tuple family: a list of kernels, each
// row of each kernel ranging over a simplex grid.
struct TupleSpace {
  std::vector<KernelShape> kernels;
  std::vector<RowSlot> slots;
  std::vector<SimplexGrid> grids;  // one per kernel (rows share a grid)

  std::int64_t combinations() const {
    std::int64_t total = 1;
    for (const auto& s : slots) {
      const std::int64_t c = s.grid->count();
      if (total > (std::int64_t{1} << 62) / c) return std::int64_t{1} << 62;
      total *= c;
    }
    return total;
  }

  std::vector<Kernel> build(std::span<const std::int64_t> choice) const {
    std::vector<std::vector<double>> tables(kernels.size());
    for (std::size_t k = 0; k < kernels.size(); ++k) {
      std::int64_t rows = 1;
      for (const auto& a : kernels[k].inputs) rows *= a.size;
      std::int64_t cols = 1;
      for (const auto& a : kernels[k].outputs) cols *= a.size;
      tables[k].resize(static_cast<std::size_t>(rows * cols));
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& s = slots[i];
      auto row = s.grid->row(choice[i]);
      std::copy(row.begin(), row.end(),
                tables[static_cast<std::size_t>(s.kernel)].begin() +
                    s.row * static_cast<std::int64_t>(row.size()));
    }
    std::vector<Kernel> out;
    out.reserve(kernels.size());
    for (std::size_t k = 0; k < kernels.size(); ++k)
      out.emplace_back(kernels[k].inputs, kernels[k].outputs, std::move(tables[k]));
    return out;
  }
};

int auto_denom(const SearchConfig& cfg, const std::vector<KernelShape>& kernels) {
  if (cfg.grid_denom > 0) return cfg.grid_denom;
  std::int64_t max_cells = 0;
  for (const auto& k : kernels) {
    std::int64_t rows = 1, cols = 1;
    for (const auto& a : k.inputs) rows *= a.size;
    for (const auto& a : k.outputs) cols *= a.size;
    max_cells = std::max(max_cells, rows * cols);
  }
  return max_cells <= 256 ? 8 : 4;
}

TupleSpace make_space(const SearchConfig& cfg, std::vector<KernelShape> kernels) {
  TupleSpace sp;
  sp.kernels = std::move(kernels);
  const int denom = auto_denom(cfg, sp.kernels);
  sp.grids.reserve(sp.kernels.size());
  for (const auto& k : sp.kernels) {
    std::int64_t cols = 1;
    for (const auto& a : k.outputs) cols *= a.size;
    sp.grids.emplace_back(static_cast<int>(cols), denom, cfg.max_row_points);
  }
  for (std::size_t k = 0; k < sp.kernels.size(); ++k) {
    std::int64_t rows = 1;
    for (const auto& a : sp.kernels[k].inputs) rows *= a.size;
    for (std::int64_t r = 0; r < rows; ++r)
      sp.slots.push_back(RowSlot{static_cast<int>(k), r, &sp.grids[k]});
  }
  return sp;
}

using EvalFn = std::function<std::optional<BoundTriple>(std::span<const Kernel>)>;

double polygon_support(const std::vector<RatePoint>& poly, double lambda) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : poly) best = std::max(best, lambda * p.r1 + (1.0 - lambda) * p.r2);
  return best;
}

// Exhaustive sweep: every grid combination, feasibility-filtered, polygons
// pooled. Point sets are merged across threads; the hull is order-blind.
std::vector<RatePoint> sweep_exhaustive(const TupleSpace& sp, const EvalFn& eval,
                                        int threads) {
  const std::int64_t total = sp.combinations();
  const int workers = resolve_threads(threads);
  std::vector<std::vector<RatePoint>> buckets(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      std::vector<std::int64_t> choice(sp.slots.size(), 0);
      auto& bucket = buckets[static_cast<std::size_t>(w)];
      for (std::int64_t i = w; i < total; i += workers) {
        std::int64_t rem = i;
        for (std::size_t s = sp.slots.size(); s-- > 0;) {
          const std::int64_t c = sp.slots[s].grid->count();
          choice[s] = rem % c;
          rem /= c;
        }
        auto kernels = sp.build(choice);
        auto b = eval(kernels);
        if (!b) continue;
        for (const auto& pt : bound_polygon(*b)) bucket.push_back(pt);
      }
    });
  }
  for (auto& t : pool) t.join();
  std::vector<RatePoint> out;
  for (auto& b : buckets) out.insert(out.end(), b.begin(), b.end());
  return out;
}

// Seeded coordinate ascent on the support objective, one task per
// (direction, restart); deterministic regardless of scheduling.
std::vector<RatePoint> sweep_ascent(const TupleSpace& sp, const EvalFn& eval,
                                    const SearchConfig& cfg) {
  struct Task {
    double lambda;
    int restart;
  };
  std::vector<Task> tasks;
  for (double l : cfg.lambdas)
    for (int r = 0; r < cfg.restarts; ++r) tasks.push_back({l, r});

  std::vector<std::vector<RatePoint>> results(tasks.size());
  parallel_for(static_cast<std::int64_t>(tasks.size()), cfg.threads, [&](std::int64_t ti) {
    const Task task = tasks[static_cast<std::size_t>(ti)];
    KeyStream rng(derive_key({cfg.seed, 0xA5CE27u, static_cast<std::uint64_t>(ti)}));

    std::vector<std::int64_t> choice(sp.slots.size(), 0);
    for (std::size_t s = 0; s < sp.slots.size(); ++s) {
      const std::int64_t c = sp.slots[s].grid->count();
      if (task.restart == 0) {
        choice[s] = 0;  // grid rows are emitted mass-first; index 0 is a corner
      } else {
        choice[s] = static_cast<std::int64_t>(rng.next_unit() * static_cast<double>(c));
        choice[s] = std::min(choice[s], c - 1);
      }
    }

    const auto objective = [&](std::span<const std::int64_t> ch) {
      auto kernels = sp.build(ch);
      auto b = eval(kernels);
      if (!b) return -std::numeric_limits<double>::infinity();
      auto poly = bound_polygon(*b);
      if (poly.empty()) return -std::numeric_limits<double>::infinity();
      return polygon_support(poly, task.lambda);
    };

    double best = objective(choice);
    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
      bool improved = false;
      for (std::size_t s = 0; s < sp.slots.size(); ++s) {
        const std::int64_t c = sp.slots[s].grid->count();
        const std::int64_t keep = choice[s];
        std::int64_t arg = keep;
        for (std::int64_t cand = 0; cand < c; ++cand) {
          if (cand == keep) continue;
          choice[s] = cand;
          const double v = objective(choice);
          if (v > best + 1e-12) {
            best = v;
            arg = cand;
            improved = true;
          }
        }
        choice[s] = arg;
      }
      if (!improved) break;
    }

    if (best > -std::numeric_limits<double>::infinity()) {
      auto kernels = sp.build(choice);
      if (auto b = eval(kernels)) results[static_cast<std::size_t>(ti)] = bound_polygon(*b);
    }
  });

  std::vector<RatePoint> out;
  for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
  return out;
}

std::vector<RatePoint> sweep_space(const TupleSpace& sp, const EvalFn& eval,
                                   const SearchConfig& cfg) {
  if (sp.combinations() <= cfg.max_exhaustive)
    return sweep_exhaustive(sp, eval, cfg.threads);
  return sweep_ascent(sp, eval, cfg);
}

// Deterministic [aux x] rows: every per-row point mass. Adds all feasible
// deterministic tuples when that family is small; guarantees the search
// sees minimum-distortion corner tuples.
std::vector<RatePoint> sweep_deterministic(const TupleSpace& sp, const EvalFn& eval) {
  std::int64_t total = 1;
  for (const auto& s : sp.slots) {
    std::int64_t cells = 1;
    for (const auto& a : sp.kernels[static_cast<std::size_t>(s.kernel)].outputs)
      cells *= a.size;
    if (total > 4096 / cells) return {};
    total *= cells;
  }
  std::vector<RatePoint> out;
  std::vector<std::int64_t> det(sp.slots.size(), 0);
  for (std::int64_t i = 0; i < total; ++i) {
    std::int64_t rem = i;
    std::vector<std::vector<double>> tables(sp.kernels.size());
    for (std::size_t k = 0; k < sp.kernels.size(); ++k) {
      std::int64_t rows = 1, cols = 1;
      for (const auto& a : sp.kernels[k].inputs) rows *= a.size;
      for (const auto& a : sp.kernels[k].outputs) cols *= a.size;
      tables[k].assign(static_cast<std::size_t>(rows * cols), 0.0);
    }
    for (std::size_t s = 0; s < sp.slots.size(); ++s) {
      std::int64_t cells = 1;
      for (const auto& a : sp.kernels[static_cast<std::size_t>(sp.slots[s].kernel)].outputs)
        cells *= a.size;
      det[s] = rem % cells;
      rem /= cells;
      auto& table = tables[static_cast<std::size_t>(sp.slots[s].kernel)];
      table[static_cast<std::size_t>(sp.slots[s].row * cells + det[s])] = 1.0;
    }
    std::vector<Kernel> kernels;
    kernels.reserve(sp.kernels.size());
    for (std::size_t k = 0; k < sp.kernels.size(); ++k)
      kernels.emplace_back(sp.kernels[k].inputs, sp.kernels[k].outputs,
                           std::move(tables[k]));
    if (auto b = eval(kernels))
      for (const auto& pt : bound_polygon(*b)) out.push_back(pt);
  }
  return out;
}

double min_expected_distortion(std::span<const double> host_marg,
                               const DistortionMeasure& d) {
  double acc = 0.0;
  for (int s = 0; s < d.host_alphabet.size; ++s) {
    double best = d.at(s, 0);
    for (int x = 1; x < d.embed_alphabet.size; ++x) best = std::min(best, d.at(s, x));
    acc += host_marg[static_cast<std::size_t>(s)] * best;
  }
  return acc;
}

int aux_or(int requested, int dflt) { return requested > 0 ? requested : dflt; }

// Fast-path evaluators for search loops: feasibility returns nullopt
// instead of throwing, and encoder shapes are trusted (the tuple space
// built them).
std::optional<BoundTriple> eval_mac_inner_opt(const MacProblem& p,
                                              std::span<const double> m1,
                                              std::span<const double> m2,
                                              const Kernel& e1, const Kernel& e2,
                                              MacCase mc) {
  if (enc_distortion(e1, m1, p.d1) > p.delta1 + kFeasTol) return std::nullopt;
  if (enc_distortion(e2, m2, p.d2) > p.delta2 + kFeasTol) return std::nullopt;
  JointPmf j = chain(chain(chain(p.host, e1), e2), p.channel);
  InfoCalc c(j);
  return mac_bounds(c, j, mc);
}

std::optional<BoundTriple> eval_mac_outer_opt(const MacProblem& p, const Kernel& enc) {
  MacOuterTuple t{enc};
  auto dist = tuple_distortion(p, t);
  if (dist.d1 > p.delta1 + kFeasTol || dist.d2 > p.delta2 + kFeasTol)
    return std::nullopt;
  JointPmf j = chain(chain(p.host, enc), p.channel);
  InfoCalc c(j);
  return mac_bounds(c, j, MacCase::C);
}

std::optional<BoundTriple> eval_bc_opt(const BcProblem& p, const Kernel& enc,
                                       BcCase bc, BoundSide side) {
  BcTuple t{enc};
  if (bc_tuple_distortion(p, t) > p.delta + kFeasTol) return std::nullopt;
  JointPmf j = chain(chain(chain(JointPmf::from_pmf(p.host), enc), p.forward),
                     p.degrade);
  InfoCalc c(j);
  return bc_bounds(c, j, bc, side);
}

std::vector<RatePoint> run_space(const TupleSpace& sp, const EvalFn& eval,
                                 const SearchConfig& cfg) {
  auto pts = sweep_space(sp, eval, cfg);
  auto det = sweep_deterministic(sp, eval);
  pts.insert(pts.end(), det.begin(), det.end());
  return pts;
}

std::vector<RatePoint> mac_search_points(const MacProblem& p, const SearchConfig& cfg,
                                         MacCase mc, BoundSide side) {
  const Alphabet s1 = p.host.axes()[0], s2 = p.host.axes()[1];
  const Alphabet x1 = p.channel.inputs()[0], x2 = p.channel.inputs()[2];
  auto m1 = host_marginal_of(p.host, 0);
  auto m2 = host_marginal_of(p.host, 1);

  if (side == BoundSide::outer) {
    // joint encoders p(x1, x2 | s1, s2)
    TupleSpace sp = make_space(cfg, {{{s1, s2}, {x1, x2}}});
    EvalFn eval = [&p](std::span<const Kernel> k) { return eval_mac_outer_opt(p, k[0]); };
    auto pts = run_space(sp, eval, cfg);
    // every product encoder pair induces a joint encoder, so the inner
    // sweep contributes valid outer tuples as well
    auto inner = mac_search_points(p, cfg, MacCase::C, BoundSide::inner);
    pts.insert(pts.end(), inner.begin(), inner.end());
    return pts;
  }

  std::vector<KernelShape> shapes;
  switch (mc) {
    case MacCase::A: {
      const Alphabet u1{"u1", aux_or(cfg.aux1, x1.size * s1.size)};
      const Alphabet u2{"u2", aux_or(cfg.aux2, x2.size * s2.size)};
      shapes = {{{s1}, {u1, x1}}, {{s2}, {u2, x2}}};
      break;
    }
    case MacCase::B: {
      const Alphabet u1{"u1", aux_or(cfg.aux1, x1.size * s1.size)};
      shapes = {{{s1}, {u1, x1}}, {{s2}, {x2}}};
      break;
    }
    case MacCase::C:
      shapes = {{{s1}, {x1}}, {{s2}, {x2}}};
      break;
  }
  TupleSpace sp = make_space(cfg, std::move(shapes));
  EvalFn eval = [&p, &m1, &m2, mc](std::span<const Kernel> k) {
    return eval_mac_inner_opt(p, m1, m2, k[0], k[1], mc);
  };
  auto pts = run_space(sp, eval, cfg);

  if (mc == MacCase::A) {
    // substituting u2 = (x2, s2) into case A recovers case B, so case B
    // candidates are case A achievable; merge that sweep
    auto from_b = mac_search_points(p, cfg, MacCase::B, BoundSide::inner);
    pts.insert(pts.end(), from_b.begin(), from_b.end());
  }
  return pts;
}

std::vector<RatePoint> bc_search_points(const BcProblem& p, const SearchConfig& cfg,
                                        BcCase bc, BoundSide side) {
  const Alphabet s = p.host.alphabet();
  const Alphabet x = p.forward.inputs()[0];
  const int xs = x.size * s.size;

  std::vector<KernelShape> shapes;
  switch (bc) {
    case BcCase::Ap:
      if (side == BoundSide::inner) {
        const Alphabet u{"u", aux_or(cfg.aux_u, xs + 1)};
        const Alphabet v{"v", aux_or(cfg.aux_v, xs * (xs + 1))};
        shapes = {{{s}, {u, v, x}}};
      } else {
        const Alphabet u{"u", aux_or(cfg.aux_u, xs + 2)};
        const Alphabet v{"v", aux_or(cfg.aux_v, xs * (xs + 2) + 1)};
        const Alphabet w{"w", aux_or(cfg.aux_w, (xs * (xs + 2) + 1) * (xs + 2) * xs + 1)};
        shapes = {{{s}, {u, v, w, x}}};
      }
      break;
    case BcCase::Bp:
      if (side == BoundSide::inner) {
        const Alphabet u{"u", aux_or(cfg.aux_u, xs + 1)};
        shapes = {{{s}, {u, x}}};
      } else {
        const Alphabet u{"u", aux_or(cfg.aux_u, xs + 1)};
        const Alphabet v{"v", aux_or(cfg.aux_v, xs * (xs + 1))};
        shapes = {{{s}, {u, v, x}}};
      }
      break;
    case BcCase::Cp:
    case BcCase::Dp: {
      const Alphabet u{"u", aux_or(cfg.aux_u, xs)};
      shapes = {{{s}, {u, x}}};
      break;
    }
  }
  TupleSpace sp = make_space(cfg, std::move(shapes));
  EvalFn eval = [&p, bc, side](std::span<const Kernel> k) {
    return eval_bc_opt(p, k[0], bc, side);
  };
  auto pts = run_space(sp, eval, cfg);

  if (side == BoundSide::outer) {
    // inner-bound points are achievable, hence inside any valid outer bound
    auto inner = bc_search_points(p, cfg, bc, BoundSide::inner);
    pts.insert(pts.end(), inner.begin(), inner.end());
  }
  return pts;
}

}  // namespace

RateRegion compute_region(const MacProblem& p, const SearchConfig& cfg, BoundSide side) {
  validate(p);
  if (side == BoundSide::outer && p.mac_case != MacCase::C)
    throw SpecError("outer bounds are available only for MAC case C");
  auto m1 = host_marginal_of(p.host, 0);
  auto m2 = host_marginal_of(p.host, 1);
  if (min_expected_distortion(m1, p.d1) > p.delta1 + kFeasTol ||
      min_expected_distortion(m2, p.d2) > p.delta2 + kFeasTol)
    throw SpecError("problem is distortion-infeasible: no encoder meets the budget");

  auto pts = mac_search_points(p, cfg, p.mac_case, side);
  pts.insert(pts.end(), cfg.seed_points.begin(), cfg.seed_points.end());
  return region_from_points(std::move(pts), cfg.lambdas);
}

RateRegion compute_region(const BcProblem& p, const SearchConfig& cfg, BoundSide side) {
  validate(p);
  std::vector<double> hm(p.host.probs().begin(), p.host.probs().end());
  if (min_expected_distortion(hm, p.d) > p.delta + kFeasTol)
    throw SpecError("problem is distortion-infeasible: no encoder meets the budget");

  auto pts = bc_search_points(p, cfg, p.bc_case, side);
  pts.insert(pts.end(), cfg.seed_points.begin(), cfg.seed_points.end());
  return region_from_points(std::move(pts), cfg.lambdas);
}

// ------------------------------------------------------------- single-user

namespace {

MacProblem degenerate_mac(const Pmf& host, const Kernel& fwd,
                          const DistortionMeasure& d, double delta, MacCase mc) {
  if (fwd.inputs().size() != 2 || fwd.outputs().size() != 1)
    throw SpecError("single-user channel must map (x, s) to (y)");
  const Alphabet s1{"s1", host.alphabet().size};
  const Alphabet s2{"s2", 1};
  const Alphabet x1{"x1", fwd.inputs()[0].size};
  const Alphabet x2{"x2", 1};
  const Alphabet y{"y", fwd.outputs()[0].size};

  JointPmf host_joint({s1, s2},
                      std::vector<double>(host.probs().begin(), host.probs().end()));
  // (x1, s1, x2, s2) row-major collapses to (x, s) when x2, s2 are singletons
  Kernel channel({x1, s1, x2, s2}, {y},
                 std::vector<double>(fwd.table().begin(), fwd.table().end()));
  DistortionMeasure d1(s1, x1, d.table);
  DistortionMeasure d2(s2, x2, {0.0});
  MacProblem p{std::move(host_joint), std::move(channel), std::move(d1), std::move(d2),
               delta, 0.0, mc};
  return p;
}

}  // namespace

double single_user_irreversible_capacity(const Pmf& host, const Kernel& fwd,
                                         const DistortionMeasure& d, double delta,
                                         const SearchConfig& cfg) {
  MacProblem p = degenerate_mac(host, fwd, d, delta, MacCase::A);
  SearchConfig c = cfg;
  c.aux2 = 1;
  RateRegion r = compute_region(p, c, BoundSide::inner);
  if (r.empty) return 0.0;
  return support_function(r, 1.0);
}

double single_user_reversible_capacity(const Pmf& host, const Kernel& fwd,
                                       const DistortionMeasure& d, double delta,
                                       const SearchConfig& cfg) {
  MacProblem p = degenerate_mac(host, fwd, d, delta, MacCase::C);
  RateRegion r = compute_region(p, cfg, BoundSide::inner);
  if (r.empty) return 0.0;
  return support_function(r, 1.0);
}

}  // namespace embedcap
