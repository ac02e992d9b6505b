// Test-side oracles: independent, straightforward reimplementations used to
// cross-check the library. Joint assembly is done with explicit nested
// loops (never chain()), and information terms use ratio-form summation
// rather than entropy arithmetic.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "embedcap/prob.hpp"
#include "embedcap/regions.hpp"
#include "embedcap/rng.hpp"

namespace oracle {

using embedcap::Alphabet;
using embedcap::BoundTriple;
using embedcap::DistortionMeasure;
using embedcap::JointPmf;
using embedcap::Kernel;
using embedcap::KeyStream;
using embedcap::MacInnerTuple;
using embedcap::MacProblem;
using embedcap::BcProblem;
using embedcap::BcTuple;

// Dense table with manual indexing; axes identified by position.
struct NTable {
  std::vector<int> dims;
  std::vector<double> vals;

  explicit NTable(std::vector<int> d) : dims(std::move(d)) {
    std::size_t cells = 1;
    for (int x : dims) cells *= static_cast<std::size_t>(x);
    vals.assign(cells, 0.0);
  }
  std::size_t idx(const std::vector<int>& c) const {
    std::size_t f = 0;
    for (std::size_t i = 0; i < dims.size(); ++i)
      f = f * static_cast<std::size_t>(dims[i]) + static_cast<std::size_t>(c[i]);
    return f;
  }
  double& at(const std::vector<int>& c) { return vals[idx(c)]; }
  double at(const std::vector<int>& c) const { return vals[idx(c)]; }

  void for_each(const std::function<void(const std::vector<int>&, double)>& fn) const {
    std::vector<int> c(dims.size(), 0);
    for (std::size_t f = 0; f < vals.size(); ++f) {
      fn(c, vals[f]);
      for (int i = static_cast<int>(dims.size()) - 1; i >= 0; --i) {
        if (++c[static_cast<std::size_t>(i)] < dims[static_cast<std::size_t>(i)]) break;
        c[static_cast<std::size_t>(i)] = 0;
      }
    }
  }
};

// marginal over the selected axis positions
inline NTable marginal(const NTable& t, const std::vector<int>& keep) {
  std::vector<int> dims;
  for (int k : keep) dims.push_back(t.dims[static_cast<std::size_t>(k)]);
  NTable out(dims);
  t.for_each([&](const std::vector<int>& c, double p) {
    std::vector<int> proj;
    proj.reserve(keep.size());
    for (int k : keep) proj.push_back(c[static_cast<std::size_t>(k)]);
    out.at(proj) += p;
  });
  return out;
}

inline double entropy_of(const NTable& t) {
  double h = 0.0;
  for (double p : t.vals)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

// I(A;B) in ratio form over the (A,B) marginal
inline double mi(const NTable& t, const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  NTable pab = marginal(t, ab);
  NTable pa = marginal(t, a);
  NTable pb = marginal(t, b);
  double total = 0.0;
  pab.for_each([&](const std::vector<int>& c, double p) {
    if (p <= 0.0) return;
    std::vector<int> ca(c.begin(), c.begin() + static_cast<long>(a.size()));
    std::vector<int> cb(c.begin() + static_cast<long>(a.size()), c.end());
    total += p * std::log2(p / (pa.at(ca) * pb.at(cb)));
  });
  return total;
}

// I(A;B|C) = sum p(abc) log2( p(abc) p(c) / (p(ac) p(bc)) )
inline double cmi(const NTable& t, const std::vector<int>& a, const std::vector<int>& b,
                  const std::vector<int>& c) {
  std::vector<int> abc = a;
  abc.insert(abc.end(), b.begin(), b.end());
  abc.insert(abc.end(), c.begin(), c.end());
  std::vector<int> ac = a;
  ac.insert(ac.end(), c.begin(), c.end());
  std::vector<int> bc = b;
  bc.insert(bc.end(), c.begin(), c.end());
  NTable pabc = marginal(t, abc);
  NTable pac = marginal(t, ac);
  NTable pbc = marginal(t, bc);
  NTable pc = marginal(t, c);
  double total = 0.0;
  pabc.for_each([&](const std::vector<int>& cc, double p) {
    if (p <= 0.0) return;
    const long na = static_cast<long>(a.size()), nb = static_cast<long>(b.size());
    std::vector<int> ca(cc.begin(), cc.begin() + na);
    std::vector<int> cb(cc.begin() + na, cc.begin() + na + nb);
    std::vector<int> ccond(cc.begin() + na + nb, cc.end());
    std::vector<int> cac = ca;
    cac.insert(cac.end(), ccond.begin(), ccond.end());
    std::vector<int> cbc = cb;
    cbc.insert(cbc.end(), ccond.begin(), ccond.end());
    total += p * std::log2(p * pc.at(ccond) / (pac.at(cac) * pbc.at(cbc)));
  });
  return total;
}

// H(A|B) = H(AB) - H(B), via marginals
inline double cond_entropy(const NTable& t, const std::vector<int>& a,
                           const std::vector<int>& b) {
  std::vector<int> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  return entropy_of(marginal(t, ab)) - entropy_of(marginal(t, b));
}

// ---------------------------------------------------------------- assembly

// MAC full joint with axes (s1, s2, u1, x1, u2, x2, y), assembled by
// explicit nested loops. Auxiliary-free encoders get u dims of size 1.
inline NTable mac_full_joint(const MacProblem& p, const MacInnerTuple& t) {
  const int ns1 = p.host.axes()[0].size, ns2 = p.host.axes()[1].size;
  const bool aux1 = t.enc1.outputs().size() == 2;
  const bool aux2 = t.enc2.outputs().size() == 2;
  const int nu1 = aux1 ? t.enc1.outputs()[0].size : 1;
  const int nx1 = t.enc1.outputs().back().size;
  const int nu2 = aux2 ? t.enc2.outputs()[0].size : 1;
  const int nx2 = t.enc2.outputs().back().size;
  const int ny = p.channel.outputs()[0].size;

  NTable out({ns1, ns2, nu1, nx1, nu2, nx2, ny});
  for (int s1 = 0; s1 < ns1; ++s1)
    for (int s2 = 0; s2 < ns2; ++s2)
      for (int u1 = 0; u1 < nu1; ++u1)
        for (int x1 = 0; x1 < nx1; ++x1)
          for (int u2 = 0; u2 < nu2; ++u2)
            for (int x2 = 0; x2 < nx2; ++x2)
              for (int y = 0; y < ny; ++y) {
                const int hidx[2] = {s1, s2};
                const double ph = p.host.at(hidx);
                const double pe1 = t.enc1.row(s1)[u1 * nx1 + x1];
                const double pe2 = t.enc2.row(s2)[u2 * nx2 + x2];
                const std::int64_t crow =
                    ((static_cast<std::int64_t>(x1) * ns1 + s1) * nx2 + x2) * ns2 + s2;
                const double pch = p.channel.row(crow)[y];
                out.at({s1, s2, u1, x1, u2, x2, y}) = ph * pe1 * pe2 * pch;
              }
  return out;
}

// axis positions in the MAC table
inline const std::vector<int> kS1{0}, kS2{1}, kU1{2}, kX1{3}, kU2{4}, kX2{5}, kY{6};

inline BoundTriple mac_caseA_bounds(const NTable& j) {
  BoundTriple b;
  b.has_sum = true;
  // unconditional forms (no time-sharing axis in searched tuples)
  b.b1 = mi(j, kU1, {kU2[0], kY[0]}) - mi(j, kU1, kS1);
  b.b2 = mi(j, kU2, {kU1[0], kY[0]}) - mi(j, kU2, kS2);
  b.b12 = mi(j, {kU1[0], kU2[0]}, kY) - mi(j, {kU1[0], kU2[0]}, {kS1[0], kS2[0]});
  return b;
}

inline BoundTriple mac_caseB_bounds(const NTable& j) {
  const std::vector<int> x2s2{kX2[0], kS2[0]};
  BoundTriple b;
  b.has_sum = true;
  b.b1 = cmi(j, kU1, kY, x2s2) - cmi(j, kU1, kS1, x2s2);
  b.b2 = cmi(j, x2s2, kY, kU1) - cond_entropy(j, kS2, kU1);
  b.b12 = mi(j, {kU1[0], kX2[0], kS2[0]}, kY) - entropy_of(marginal(j, kS2)) -
          cmi(j, kU1, kS1, x2s2);
  return b;
}

inline BoundTriple mac_caseC_bounds(const NTable& j) {
  const std::vector<int> x1s1{kX1[0], kS1[0]};
  const std::vector<int> x2s2{kX2[0], kS2[0]};
  BoundTriple b;
  b.has_sum = true;
  b.b1 = cmi(j, x1s1, kY, x2s2) - cond_entropy(j, kS1, kS2);
  b.b2 = cmi(j, x2s2, kY, x1s1) - cond_entropy(j, kS2, kS1);
  b.b12 = mi(j, {kX1[0], kS1[0], kX2[0], kS2[0]}, kY) -
          entropy_of(marginal(j, {kS1[0], kS2[0]}));
  return b;
}

// BC full joint with axes (s, aux..., x, y, z)
inline NTable bc_full_joint(const BcProblem& p, const BcTuple& t) {
  const int ns = p.host.alphabet().size;
  const int ny = p.forward.outputs()[0].size;
  const int nz = p.degrade.outputs()[0].size;
  std::vector<int> dims{ns};
  for (const auto& a : t.enc.outputs()) dims.push_back(a.size);
  dims.push_back(ny);
  dims.push_back(nz);

  const std::int64_t enc_cells = t.enc.row_cells();
  const int nx = t.enc.outputs().back().size;
  NTable out(dims);
  for (int s = 0; s < ns; ++s)
    for (std::int64_t e = 0; e < enc_cells; ++e)
      for (int y = 0; y < ny; ++y)
        for (int z = 0; z < nz; ++z) {
          const int x = static_cast<int>(e % nx);
          const double pv = p.host[s] * t.enc.row(s)[e] *
                            p.forward.row(static_cast<std::int64_t>(x) * ns + s)[y] *
                            p.degrade.row(y)[z];
          std::vector<int> c{s};
          std::int64_t rem = e;
          std::vector<int> aux_digits(t.enc.outputs().size());
          for (int i = static_cast<int>(t.enc.outputs().size()) - 1; i >= 0; --i) {
            aux_digits[static_cast<std::size_t>(i)] =
                static_cast<int>(rem % t.enc.outputs()[static_cast<std::size_t>(i)].size);
            rem /= t.enc.outputs()[static_cast<std::size_t>(i)].size;
          }
          for (int d : aux_digits) c.push_back(d);
          c.push_back(y);
          c.push_back(z);
          out.at(c) += pv;
        }
  return out;
}

// ------------------------------------------------------------- generators

inline std::vector<double> random_row(KeyStream& rng, int cells) {
  std::vector<double> v(static_cast<std::size_t>(cells));
  double sum = 0.0;
  for (auto& x : v) {
    x = rng.next_unit() + 1e-3;
    sum += x;
  }
  for (auto& x : v) x /= sum;
  // exact renormalization so constructors accept the row
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) acc += v[i];
  v.back() = 1.0 - acc;
  return v;
}

inline Kernel random_kernel(KeyStream& rng, std::vector<Alphabet> in,
                            std::vector<Alphabet> out) {
  std::int64_t rows = 1, cols = 1;
  for (const auto& a : in) rows *= a.size;
  for (const auto& a : out) cols *= a.size;
  std::vector<double> table;
  table.reserve(static_cast<std::size_t>(rows * cols));
  for (std::int64_t r = 0; r < rows; ++r)
    for (double v : random_row(rng, static_cast<int>(cols))) table.push_back(v);
  return Kernel(std::move(in), std::move(out), std::move(table));
}

inline JointPmf random_joint(KeyStream& rng, std::vector<Alphabet> axes) {
  std::int64_t cells = 1;
  for (const auto& a : axes) cells *= a.size;
  return JointPmf(std::move(axes), random_row(rng, static_cast<int>(cells)));
}

// support value of the polygon cut out by a bound triple (same clipping
// rules, written directly)
inline double bound_support(const BoundTriple& bin, double lambda) {
  const double b1 = bin.b1 >= -1e-9 ? std::max(bin.b1, 0.0) : bin.b1;
  const double b2 = bin.b2 >= -1e-9 ? std::max(bin.b2, 0.0) : bin.b2;
  double b12 = bin.has_sum ? bin.b12 : 1e18;
  if (b12 >= -1e-9) b12 = std::max(b12, 0.0);
  const double neg = -1.0;
  if (b12 < 0.0 || (b1 < 0.0 && b2 < 0.0)) return neg;  // contributes nothing
  std::vector<std::pair<double, double>> pts;
  if (b1 < 0.0) {
    pts = {{0.0, 0.0}, {0.0, std::min(b2, b12)}};
  } else if (b2 < 0.0) {
    pts = {{0.0, 0.0}, {std::min(b1, b12), 0.0}};
  } else {
    pts = {{0.0, 0.0},
           {std::min(b1, b12), 0.0},
           {0.0, std::min(b2, b12)},
           {b1, std::min(b2, std::max(b12 - b1, 0.0))},
           {std::min(b1, std::max(b12 - b2, 0.0)), b2}};
  }
  double best = neg;
  for (auto [r1, r2] : pts) {
    if (r1 + r2 > b12 + 1e-12) continue;
    best = std::max(best, lambda * r1 + (1.0 - lambda) * r2);
  }
  return best;
}

}  // namespace oracle
