#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "builders.hpp"
#include "embedcap/regions.hpp"
#include "oracles.hpp"

using namespace embedcap;
using builders::a;

namespace {

double h2(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

// u2 = (x2, s2) packed deterministically on top of p(x2 | s2)
Kernel substitute_u2(const Kernel& enc2) {
  const int ns = enc2.inputs()[0].size;
  const int nx = enc2.outputs().back().size;
  const int nu = nx * ns;
  std::vector<double> t(static_cast<std::size_t>(ns) * nu * nx, 0.0);
  for (int s = 0; s < ns; ++s)
    for (int x = 0; x < nx; ++x) {
      const int u = x * ns + s;
      t[static_cast<std::size_t>((s * nu + u) * nx + x)] = enc2.row(s)[x];
    }
  return Kernel({enc2.inputs()[0]}, {a("u2", nu), enc2.outputs().back()}, t);
}

MacInnerTuple random_aux_tuple(KeyStream& rng, int nu1, int nu2) {
  Kernel e1 = oracle::random_kernel(rng, {a("s1", 2)}, {a("u1", nu1), a("x1", 2)});
  Kernel e2 = oracle::random_kernel(rng, {a("s2", 2)}, {a("u2", nu2), a("x2", 2)});
  return MacInnerTuple{std::move(e1), std::move(e2)};
}

}  // namespace

TEST_CASE("case A evaluator on the clean degenerate instance") {
  // degenerate hosts, orthogonal clean outputs, u_i = x_i uniform
  MacProblem p = builders::mac_clean_orthogonal();
  // u = x deterministically, x uniform
  Kernel e1({a("s1", 1)}, {a("u1", 2), a("x1", 2)}, {0.5, 0, 0, 0.5});
  Kernel e2({a("s2", 1)}, {a("u2", 2), a("x2", 2)}, {0.5, 0, 0, 0.5});
  MacProblem pa = p;
  pa.mac_case = MacCase::A;
  auto b = eval_mac_caseA(MacInnerTuple{e1, e2}, pa);
  CHECK(b.b1 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(b.b2 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(b.b12 == doctest::Approx(2.0).epsilon(1e-9));

  // constant auxiliaries collapse every bound to zero
  Kernel c1({a("s1", 1)}, {a("u1", 1), a("x1", 2)}, {0.5, 0.5});
  Kernel c2({a("s2", 1)}, {a("u2", 1), a("x2", 2)}, {0.5, 0.5});
  auto bz = eval_mac_caseA(MacInnerTuple{c1, c2}, pa);
  CHECK(bz.b1 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(bz.b2 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(bz.b12 == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("case B evaluator degenerate host") {
  // deterministic host s2, clean orthogonal y, u1 = x1
  MacProblem p = builders::mac_clean_orthogonal();
  p.mac_case = MacCase::B;
  Kernel e1({a("s1", 1)}, {a("u1", 2), a("x1", 2)}, {0.5, 0, 0, 0.5});
  Kernel e2({a("s2", 1)}, {a("x2", 2)}, {0.5, 0.5});
  auto b = eval_mac_caseB(MacInnerTuple{e1, e2}, p);
  // b2 = H(x2) with the degenerate-host terms vanishing
  CHECK(b.b2 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(b.b1 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("case B equals case A under the u2 = (x2, s2) substitution") {
  KeyStream rng(derive_key({11, 1}));
  for (int trial = 0; trial < 20; ++trial) {
    MacProblem p = builders::mac_random(rng, MacCase::B, 0.45, 0.9);
    Kernel e1 = oracle::random_kernel(rng, {a("s1", 2)}, {a("u1", 2), a("x1", 2)});
    Kernel e2 = oracle::random_kernel(rng, {a("s2", 2)}, {a("x2", 2)});
    BoundTriple vb;
    try {
      vb = eval_mac_caseB(MacInnerTuple{e1, e2}, p);
    } catch (const SpecError&) {
      continue;  // random tuple infeasible for the sampled budget
    }
    MacProblem pa = p;
    pa.mac_case = MacCase::A;
    auto va = eval_mac_caseA(MacInnerTuple{e1, substitute_u2(e2)}, pa);
    CHECK(std::abs(va.b1 - vb.b1) < 1e-9);
    CHECK(std::abs(va.b2 - vb.b2) < 1e-9);
    CHECK(std::abs(va.b12 - vb.b12) < 1e-9);
  }
}

TEST_CASE("case C evaluator trivial values") {
  MacProblem p = builders::mac_clean_orthogonal();
  MacInnerTuple uniform{Kernel({a("s1", 1)}, {a("x1", 2)}, {0.5, 0.5}),
                        Kernel({a("s2", 1)}, {a("x2", 2)}, {0.5, 0.5})};
  auto b = eval_mac_caseC(uniform, p);
  CHECK(b.b1 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(b.b2 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(b.b12 == doctest::Approx(2.0).epsilon(1e-9));

  // uniform independent hosts with zero budgets force x = s and all
  // information gains cancel against the host entropies
  MacProblem pz = builders::mac_correlated(0.5, 0.0, 0.0);
  // orthogonal reveal channel: y = (x1, x2) ignoring hosts
  std::vector<double> chan;
  for (int x1 = 0; x1 < 2; ++x1)
    for (int s1 = 0; s1 < 2; ++s1)
      for (int x2 = 0; x2 < 2; ++x2)
        for (int s2 = 0; s2 < 2; ++s2)
          for (int y = 0; y < 4; ++y) chan.push_back(y == 2 * x1 + x2 ? 1.0 : 0.0);
  pz.channel = Kernel({a("x1", 2), a("s1", 2), a("x2", 2), a("s2", 2)}, {a("y", 4)}, chan);
  MacInnerTuple ident{builders::identity_encoder("s1", "x1"),
                      builders::identity_encoder("s2", "x2")};
  auto bz = eval_mac_caseC(ident, pz);
  CHECK(bz.b1 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(bz.b2 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(bz.b12 == doctest::Approx(0.0).epsilon(1e-9));

  // infeasible tuple rejected: uniform encoder has distortion 0.5 > 0
  CHECK_THROWS_AS(eval_mac_caseC(MacInnerTuple{builders::uniform_encoder("s1", 2, "x1"),
                                               builders::uniform_encoder("s2", 2, "x2")},
                                 pz),
                  SpecError);
}

TEST_CASE("MAC evaluators match the naive full-joint oracle") {
  KeyStream rng(derive_key({11, 2}));
  for (int trial = 0; trial < 30; ++trial) {
    MacProblem p = builders::mac_random(rng, MacCase::A, 0.5, 1.0);
    MacInnerTuple t = random_aux_tuple(rng, 2, 2);
    BoundTriple got;
    try {
      got = eval_mac_caseA(t, p);
    } catch (const SpecError&) {
      continue;
    }
    auto nj = oracle::mac_full_joint(p, t);
    auto want = oracle::mac_caseA_bounds(nj);
    CHECK(std::abs(got.b1 - want.b1) < 1e-9);
    CHECK(std::abs(got.b2 - want.b2) < 1e-9);
    CHECK(std::abs(got.b12 - want.b12) < 1e-9);

    // same tuple evaluated as case C (auxiliaries ignored by the formulas)
    MacProblem pc = p;
    pc.mac_case = MacCase::C;
    auto got_c = eval_mac_caseC(t, pc);
    auto want_c = oracle::mac_caseC_bounds(nj);
    CHECK(std::abs(got_c.b1 - want_c.b1) < 1e-9);
    CHECK(std::abs(got_c.b2 - want_c.b2) < 1e-9);
    CHECK(std::abs(got_c.b12 - want_c.b12) < 1e-9);
  }
}

TEST_CASE("mixed alphabet sizes agree with the naive oracle") {
  // |S2| = |X2| = 3 and |Y| = 3 exercise non-binary index arithmetic
  KeyStream rng(derive_key({11, 20}));
  for (int trial = 0; trial < 12; ++trial) {
    JointPmf host = oracle::random_joint(rng, {a("s1", 2), a("s2", 3)});
    Kernel channel = oracle::random_kernel(
        rng, {a("x1", 2), a("s1", 2), a("x2", 3), a("s2", 3)}, {a("y", 3)});
    DistortionMeasure d1(a("s1", 2), a("x1", 2), {0, 1, 1, 0});
    DistortionMeasure d2(a("s2", 3), a("x2", 3), {0, 1, 1, 1, 0, 1, 1, 1, 0});
    MacProblem p{std::move(host), std::move(channel), d1, d2, 0.9, 0.9, MacCase::A};

    Kernel e1 = oracle::random_kernel(rng, {a("s1", 2)}, {a("u1", 2), a("x1", 2)});
    Kernel e2 = oracle::random_kernel(rng, {a("s2", 3)}, {a("u2", 3), a("x2", 3)});
    MacInnerTuple t{e1, e2};
    BoundTriple got;
    try {
      got = eval_mac_caseA(t, p);
    } catch (const SpecError&) {
      continue;
    }
    auto nj = oracle::mac_full_joint(p, t);
    auto want = oracle::mac_caseA_bounds(nj);
    CHECK(std::abs(got.b1 - want.b1) < 1e-9);
    CHECK(std::abs(got.b2 - want.b2) < 1e-9);
    CHECK(std::abs(got.b12 - want.b12) < 1e-9);

    MacProblem pc = p;
    pc.mac_case = MacCase::C;
    auto got_c = eval_mac_caseC(t, pc);
    auto want_c = oracle::mac_caseC_bounds(nj);
    CHECK(std::abs(got_c.b1 - want_c.b1) < 1e-9);
    CHECK(std::abs(got_c.b12 - want_c.b12) < 1e-9);
  }

  // ternary-host BC with |Y| = |Z| = 2
  for (int trial = 0; trial < 12; ++trial) {
    JointPmf host_j = oracle::random_joint(rng, {a("s", 3)});
    Pmf host = host_j.as_pmf();
    Kernel forward = oracle::random_kernel(rng, {a("x", 2), a("s", 3)}, {a("y", 2)});
    Kernel degrade = oracle::random_kernel(rng, {a("y", 2)}, {a("z", 2)});
    DistortionMeasure d(a("s", 3), a("x", 2), {0, 1, 1, 0, 1, 1});
    BcProblem p{std::move(host), std::move(forward), std::move(degrade), d, 0.95,
                BcCase::Cp};
    Kernel enc = oracle::random_kernel(rng, {a("s", 3)}, {a("u", 2), a("x", 2)});
    BoundTriple got;
    try {
      got = eval_bc_caseC(BcTuple{enc}, p);
    } catch (const SpecError&) {
      continue;
    }
    auto nj = oracle::bc_full_joint(p, BcTuple{enc});
    const std::vector<int> S{0}, U{1}, X{2}, Y{3}, Z{4};
    const double b1 = oracle::cmi(nj, X, Y, {U[0], S[0]});
    const double b2 =
        oracle::mi(nj, {X[0], S[0]}, Z) - oracle::entropy_of(oracle::marginal(nj, S));
    CHECK(std::abs(got.b1 - b1) < 1e-9);
    CHECK(std::abs(got.b2 - b2) < 1e-9);
  }

  // a small ternary-host region end to end
  {
    Pmf host(a("s", 3), {0.5, 0.25, 0.25});
    std::vector<double> fwd;
    for (int x = 0; x < 2; ++x)
      for (int s = 0; s < 3; ++s) {
        (void)s;
        for (int y = 0; y < 2; ++y) fwd.push_back(y == x ? 1.0 : 0.0);
      }
    Kernel forward({a("x", 2), a("s", 3)}, {a("y", 2)}, fwd);
    Kernel degrade({a("y", 2)}, {a("z", 2)}, {1, 0, 0, 1});
    DistortionMeasure d(a("s", 3), a("x", 2), {0, 1, 1, 0, 0.5, 0.5});
    BcProblem p{std::move(host), std::move(forward), std::move(degrade), d, 0.6,
                BcCase::Cp};
    SearchConfig cfg;
    cfg.grid_denom = 4;
    cfg.aux_u = 2;
    RateRegion r = compute_region(p, cfg, BoundSide::inner);
    REQUIRE(!r.empty);
    // the channel is clean, so r1 can reach H(X|U,S) choices above zero
    CHECK(support_function(r, 1.0) > 0.1);
    // recovering a ternary host through one clean bit is impossible: r2 = 0
    CHECK(support_function(r, 0.0) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("BC evaluators trivial values and oracle agreement") {
  // constants: every bound zero (case A' inner)
  BcProblem single = builders::bc_single_user(0.0, BcCase::Ap);
  Kernel consts({a("s", 1)}, {a("u", 1), a("v", 1), a("x", 2)}, {0.5, 0.5});
  auto bz = eval_bc_caseA_inner(BcTuple{consts}, single);
  CHECK(bz.b1 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(bz.b2 == doctest::Approx(0.0).epsilon(1e-9));

  // deterministic host, v = x, u constant, clean y = z = x: (H(x), 0)
  Kernel vx({a("s", 1)}, {a("u", 1), a("v", 2), a("x", 2)}, {0.5, 0, 0, 0.5});
  auto bv = eval_bc_caseA_inner(BcTuple{vx}, single);
  CHECK(bv.b1 == doctest::Approx(1.0 - h2(0.0)).epsilon(1e-9));
  CHECK(bv.b2 == doctest::Approx(0.0).epsilon(1e-9));

  // case B' inner, u constant, deterministic host, clean y: (H(x), 0)
  BcProblem pb = builders::bc_single_user(0.0, BcCase::Bp);
  Kernel ub({a("s", 1)}, {a("u", 1), a("x", 2)}, {0.5, 0.5});
  auto bb = eval_bc_caseB_inner(BcTuple{ub}, pb);
  CHECK(bb.b1 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(bb.b2 == doctest::Approx(0.0).epsilon(1e-9));

  // case B' inner, u constant, uniform host, zero budget, clean y = x:
  // I(X,S;Y) = H(S) cancels exactly
  BcProblem pz = builders::bc_clean_forward(0.0, 0.0, BcCase::Bp);
  Kernel uz({a("s", 2)}, {a("u", 1), a("x", 2)}, {1, 0, 0, 1});
  auto bzz = eval_bc_caseB_inner(BcTuple{uz}, pz);
  CHECK(bzz.b1 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(bzz.b2 == doctest::Approx(0.0).epsilon(1e-9));

  // case C': deterministic host, u constant, clean uniform x: (1, 1)
  BcProblem pc = builders::bc_single_user(0.0, BcCase::Cp);
  Kernel uc({a("s", 1)}, {a("u", 1), a("x", 2)}, {0.5, 0.5});
  auto bc = eval_bc_caseC(BcTuple{uc}, pc);
  CHECK(bc.b1 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(bc.b2 == doctest::Approx(1.0).epsilon(1e-9));

  // case C': uniform host, zero budget, clean y = z = x: (0, 0)
  BcProblem pcz = builders::bc_clean_forward(0.0, 0.0, BcCase::Cp);
  Kernel ucz({a("s", 2)}, {a("u", 1), a("x", 2)}, {1, 0, 0, 1});
  auto bcz = eval_bc_caseC(BcTuple{ucz}, pcz);
  CHECK(bcz.b1 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(bcz.b2 == doctest::Approx(0.0).epsilon(1e-9));

  // random tuples against the ratio-form oracle, all BC evaluators
  KeyStream rng(derive_key({11, 3}));
  for (int trial = 0; trial < 20; ++trial) {
    BcProblem p = builders::bc_random(rng, BcCase::Ap, 0.5, 1.0);
    Kernel enc = oracle::random_kernel(rng, {a("s", 2)},
                                       {a("u", 2), a("v", 2), a("x", 2)});
    BoundTriple got;
    try {
      got = eval_bc_caseA_inner(BcTuple{enc}, p);
    } catch (const SpecError&) {
      continue;
    }
    auto nj = oracle::bc_full_joint(p, BcTuple{enc});
    // axes: (s, u, v, x, y, z)
    const std::vector<int> S{0}, U{1}, V{2}, X{3}, Y{4}, Z{5};
    const double b1 = oracle::cmi(nj, V, Y, U) - oracle::cmi(nj, V, S, U);
    const double b2 = oracle::mi(nj, U, Z) - oracle::mi(nj, U, S);
    CHECK(std::abs(got.b1 - b1) < 1e-9);
    CHECK(std::abs(got.b2 - b2) < 1e-9);

    // case B' outer on the same tuple shape (u, v)
    BcProblem pbo = p;
    pbo.bc_case = BcCase::Bp;
    auto got_bo = eval_bc_caseB_outer(BcTuple{enc}, pbo);
    const double bo1 = oracle::cmi(nj, {X[0], S[0]}, Y, U) - oracle::cond_entropy(nj, S, U);
    const double bo2 = oracle::mi(nj, {U[0], V[0]}, Z) - oracle::mi(nj, {U[0], V[0]}, S);
    CHECK(std::abs(got_bo.b1 - bo1) < 1e-9);
    CHECK(std::abs(got_bo.b2 - bo2) < 1e-9);
  }

  for (int trial = 0; trial < 20; ++trial) {
    BcProblem p = builders::bc_random(rng, BcCase::Cp, 0.5, 1.0);
    Kernel enc = oracle::random_kernel(rng, {a("s", 2)}, {a("u", 2), a("x", 2)});
    BoundTriple got;
    try {
      got = eval_bc_caseC(BcTuple{enc}, p);
    } catch (const SpecError&) {
      continue;
    }
    auto nj = oracle::bc_full_joint(p, BcTuple{enc});
    // axes: (s, u, x, y, z)
    const std::vector<int> S{0}, U{1}, X{2}, Y{3}, Z{4};
    const double b1 = oracle::cmi(nj, X, Y, {U[0], S[0]});
    const double b2 =
        oracle::mi(nj, {X[0], S[0]}, Z) - oracle::entropy_of(oracle::marginal(nj, S));
    CHECK(std::abs(got.b1 - b1) < 1e-9);
    CHECK(std::abs(got.b2 - b2) < 1e-9);

    // B' inner shares the tuple shape
    BcProblem pbi = p;
    pbi.bc_case = BcCase::Bp;
    auto got_bi = eval_bc_caseB_inner(BcTuple{enc}, pbi);
    const double bi1 = oracle::cmi(nj, {X[0], S[0]}, Y, U) - oracle::cond_entropy(nj, S, U);
    const double bi2 = oracle::mi(nj, U, Z) - oracle::mi(nj, U, S);
    CHECK(std::abs(got_bi.b1 - bi1) < 1e-9);
    CHECK(std::abs(got_bi.b2 - bi2) < 1e-9);
  }
}

TEST_CASE("A' outer evaluator reductions") {
  BcProblem single = builders::bc_single_user(0.0, BcCase::Ap);

  // constants: everything collapses to zero
  Kernel consts({a("s", 1)}, {a("u", 1), a("v", 1), a("w", 1), a("x", 2)}, {0.5, 0.5});
  auto bz = eval_bc_caseA_outer(BcTuple{consts}, single);
  CHECK(bz.b1 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(bz.b2 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(bz.b12 == doctest::Approx(0.0).epsilon(1e-9));

  // deterministic host, v = x, u and w constant, clean y: sum bound H(x)
  Kernel vx({a("s", 1)}, {a("u", 1), a("v", 2), a("w", 1), a("x", 2)},
            {0.5, 0, 0, 0.5});
  auto bv = eval_bc_caseA_outer(BcTuple{vx}, single);
  CHECK(bv.b12 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(bv.b1 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(bv.has_sum);
}

TEST_CASE("support samples stay consistent with hull vertices") {
  MacProblem p = builders::mac_correlated(0.8, 0.05, 0.3);
  SearchConfig cfg;
  RateRegion r = compute_region(p, cfg, BoundSide::inner);
  REQUIRE(!r.empty);
  CHECK(region_contains(r, {0.0, 0.0}, 1e-9));  // nonempty regions keep the origin
  for (const auto& s : r.supports) {
    double want = -1e18;
    for (const auto& v : r.hull)
      want = std::max(want, s.lambda * v.r1 + (1.0 - s.lambda) * v.r2);
    CHECK(std::abs(s.value - want) <= 1e-6);
    CHECK(std::abs((s.lambda * s.argmax.r1 + (1.0 - s.lambda) * s.argmax.r2) - s.value) <=
          1e-9);
  }

  // singleton origin region
  RateRegion origin = region_from_points({{0.0, 0.0}}, std::vector<double>{0.5});
  CHECK(support_function(origin, 0.5) == doctest::Approx(0.0));
}

TEST_CASE("B' outer with v a function of u equals the inner bound") {
  KeyStream rng(derive_key({11, 4}));
  for (int trial = 0; trial < 10; ++trial) {
    BcProblem p = builders::bc_random(rng, BcCase::Bp, 0.5, 1.0);
    Kernel inner_enc = oracle::random_kernel(rng, {a("s", 2)}, {a("u", 2), a("x", 2)});
    // v := u deterministically
    std::vector<double> t(static_cast<std::size_t>(2 * 2 * 2 * 2), 0.0);
    for (int s = 0; s < 2; ++s)
      for (int u = 0; u < 2; ++u)
        for (int x = 0; x < 2; ++x)
          t[static_cast<std::size_t>((s * 4 + u * 2 + u) * 2 + x)] =
              inner_enc.row(s)[u * 2 + x];
    Kernel outer_enc({a("s", 2)}, {a("u", 2), a("v", 2), a("x", 2)}, t);
    BoundTriple bi, bo;
    try {
      bi = eval_bc_caseB_inner(BcTuple{inner_enc}, p);
      bo = eval_bc_caseB_outer(BcTuple{outer_enc}, p);
    } catch (const SpecError&) {
      continue;
    }
    CHECK(std::abs(bi.b1 - bo.b1) < 1e-9);
    CHECK(std::abs(bi.b2 - bo.b2) < 1e-9);
  }
}

TEST_CASE("evaluators are invariant to auxiliary relabeling") {
  KeyStream rng(derive_key({11, 5}));
  MacProblem p = builders::mac_random(rng, MacCase::A, 0.6, 1.0);
  Kernel e1 = oracle::random_kernel(rng, {a("s1", 2)}, {a("u1", 3), a("x1", 2)});
  Kernel e2 = oracle::random_kernel(rng, {a("s2", 2)}, {a("u2", 2), a("x2", 2)});

  // permute u1 labels: (0,1,2) -> (2,0,1)
  const int perm[3] = {2, 0, 1};
  std::vector<double> t(e1.table().begin(), e1.table().end());
  std::vector<double> permuted(t.size());
  for (int s = 0; s < 2; ++s)
    for (int u = 0; u < 3; ++u)
      for (int x = 0; x < 2; ++x)
        permuted[static_cast<std::size_t>((s * 3 + perm[u]) * 2 + x)] =
            t[static_cast<std::size_t>((s * 3 + u) * 2 + x)];
  Kernel e1p({a("s1", 2)}, {a("u1", 3), a("x1", 2)}, permuted);

  BoundTriple b0, b1;
  try {
    b0 = eval_mac_caseA(MacInnerTuple{e1, e2}, p);
    b1 = eval_mac_caseA(MacInnerTuple{e1p, e2}, p);
  } catch (const SpecError&) {
    return;
  }
  CHECK(std::abs(b0.b1 - b1.b1) < 1e-9);
  CHECK(std::abs(b0.b2 - b1.b2) < 1e-9);
  CHECK(std::abs(b0.b12 - b1.b12) < 1e-9);
}

TEST_CASE("bound polygon semantics") {
  // plain pentagon
  auto pts = bound_polygon({1.0, 1.0, 1.5, true});
  RateRegion r = region_from_points(pts, std::vector<double>{0.5});
  CHECK(support_function(r, 0.5) == doctest::Approx(0.75));
  CHECK(region_contains(r, {0.75, 0.75}, 1e-9));
  CHECK_FALSE(region_contains(r, {0.8, 0.8}, 1e-9));

  // no sum bound: rectangle
  auto rect = bound_polygon({0.5, 0.25, 0.0, false});
  RateRegion rr = region_from_points(rect, std::vector<double>{});
  CHECK(region_contains(rr, {0.5, 0.25}, 1e-9));

  // negative first bound pins r1 to zero but keeps the r2 segment
  auto seg = bound_polygon({-0.2, 0.7, 1.0, true});
  REQUIRE(seg.size() == 2);
  CHECK(seg[1].r1 == doctest::Approx(0.0));
  CHECK(seg[1].r2 == doctest::Approx(0.7));

  // all bounds negative contributes nothing
  CHECK(bound_polygon({-0.5, -0.1, 2.0, true}).empty());
  CHECK(bound_polygon({0.5, 0.5, -0.2, true}).empty());

  // sum bound tighter than both individual bounds: triangle, and no vertex
  // may breach r1 + r2 <= b12
  auto tri = bound_polygon({0.6, 0.53, 0.35, true});
  for (const auto& pt : tri) {
    CHECK(pt.r1 + pt.r2 <= 0.35 + 1e-12);
    CHECK(pt.r1 <= 0.6 + 1e-12);
  }
  RateRegion rt = region_from_points(tri, std::vector<double>{1.0});
  CHECK(support_function(rt, 1.0) == doctest::Approx(0.35));

  // bounds within 1e-9 of zero count as zero
  auto origin = bound_polygon({-1e-12, -1e-12, -1e-12, true});
  REQUIRE(!origin.empty());
  CHECK(origin[0].r1 == doctest::Approx(0.0));

  // degenerate all-zero triple yields exactly the origin after the hull
  RateRegion zr = region_from_points(bound_polygon({0, 0, 0, true}),
                                     std::vector<double>{0.0, 1.0});
  CHECK(zr.hull.size() == 1);
  CHECK_FALSE(zr.empty);
}

TEST_CASE("support function and containment") {
  std::vector<RatePoint> square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  RateRegion r = region_from_points(square, std::vector<double>{0.0, 0.5, 1.0});
  CHECK(support_function(r, 0.5) == doctest::Approx(1.0));
  CHECK(support_function(r, 0.0) == doctest::Approx(1.0));
  CHECK(region_contains(r, {0, 0}, 1e-9));
  CHECK(region_contains(r, {1, 1}, 1e-9));
  CHECK_FALSE(region_contains(r, {1.1, 0.5}, 1e-6));

  // random polygons: support equals the max over input points
  KeyStream rng(derive_key({11, 6}));
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<RatePoint> pts;
    for (int i = 0; i < 12; ++i)
      pts.push_back({rng.next_unit() * 2, rng.next_unit() * 2});
    RateRegion rr = region_from_points(pts, std::vector<double>{});
    for (double l : {0.0, 0.3, 0.8, 1.0}) {
      double want = -1;
      for (const auto& q : pts) want = std::max(want, l * q.r1 + (1 - l) * q.r2);
      CHECK(support_function(rr, l) == doctest::Approx(want).epsilon(1e-9));
    }
    for (const auto& q : pts) CHECK(region_contains(rr, q, 1e-9));
  }

  RateRegion empty;
  CHECK_THROWS_AS(support_function(empty, 0.5), SpecError);
}

TEST_CASE("clean orthogonal MAC region is the unit square") {
  MacProblem p = builders::mac_clean_orthogonal();
  SearchConfig cfg;
  RateRegion r = compute_region(p, cfg, BoundSide::inner);
  REQUIRE(!r.empty);
  CHECK(support_function(r, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(support_function(r, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(support_function(r, 0.5) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(region_contains(r, {1.0, 1.0}, 1e-9));
  // exact unit-square vertices
  REQUIRE(r.hull.size() == 4);
  CHECK(region_contains(r, {0.0, 1.0}, 1e-12));
  CHECK(region_contains(r, {1.0, 0.0}, 1e-12));
}

TEST_CASE("zero-budget uniform-host case C region collapses to the origin") {
  MacProblem p = builders::mac_correlated(0.5, 0.0, 0.0);
  std::vector<double> chan;
  for (int x1 = 0; x1 < 2; ++x1)
    for (int s1 = 0; s1 < 2; ++s1)
      for (int x2 = 0; x2 < 2; ++x2)
        for (int s2 = 0; s2 < 2; ++s2)
          for (int y = 0; y < 4; ++y) chan.push_back(y == 2 * x1 + x2 ? 1.0 : 0.0);
  p.channel = Kernel({a("x1", 2), a("s1", 2), a("x2", 2), a("s2", 2)}, {a("y", 4)}, chan);
  SearchConfig cfg;
  RateRegion r = compute_region(p, cfg, BoundSide::inner);
  REQUIRE(!r.empty);
  REQUIRE(r.hull.size() == 1);
  CHECK(r.hull[0].r1 == doctest::Approx(0.0));
  CHECK(r.hull[0].r2 == doctest::Approx(0.0));
}

TEST_CASE("distortion-infeasible problems are rejected distinctly") {
  MacProblem p = builders::mac_clean_orthogonal();
  // min distortion is 0.4 per letter yet the budget says 0.1
  p.d1 = DistortionMeasure(a("s1", 1), a("x1", 2), {0.4, 0.9});
  p.delta1 = 0.1;
  SearchConfig cfg;
  CHECK_THROWS_WITH_AS(compute_region(p, cfg, BoundSide::inner),
                       doctest::Contains("distortion-infeasible"), SpecError);
}

TEST_CASE("case C inner region is contained in the outer region") {
  KeyStream rng(derive_key({11, 7}));
  SearchConfig cfg;
  cfg.grid_denom = 4;
  cfg.max_exhaustive = 20000;  // forces ascent for the joint-encoder search
  cfg.restarts = 2;
  for (int trial = 0; trial < 4; ++trial) {
    MacProblem p = builders::mac_random(rng, MacCase::C);
    RateRegion inner = compute_region(p, cfg, BoundSide::inner);
    RateRegion outer = compute_region(p, cfg, BoundSide::outer);
    if (inner.empty) continue;
    REQUIRE(!outer.empty);
    for (double l : {0.0, 0.25, 0.5, 0.75, 1.0})
      CHECK(support_function(inner, l) <= support_function(outer, l) + 1e-6);
    for (const auto& v : inner.hull) CHECK(region_contains(outer, v, 1e-6));
  }
}

TEST_CASE("distortion nesting") {
  KeyStream rng(derive_key({11, 8}));
  SearchConfig cfg;
  cfg.grid_denom = 4;
  for (int trial = 0; trial < 4; ++trial) {
    MacProblem p = builders::mac_random(rng, MacCase::C, 0.3, 0.45);
    RateRegion tight = compute_region(p, cfg, BoundSide::inner);
    MacProblem wider = p;
    wider.delta1 = p.delta1 + 0.2;
    wider.delta2 = p.delta2 + 0.2;
    RateRegion wide = compute_region(wider, cfg, BoundSide::inner);
    if (tight.empty) continue;
    REQUIRE(!wide.empty);
    for (double l : {0.0, 0.25, 0.5, 0.75, 1.0})
      CHECK(support_function(tight, l) <= support_function(wide, l) + 1e-6);
  }
}

TEST_CASE("case B region is contained in case A region") {
  KeyStream rng(derive_key({11, 9}));
  SearchConfig cfg;
  cfg.grid_denom = 4;
  cfg.max_exhaustive = 5000;  // auxiliary searches run in ascent mode
  cfg.restarts = 2;
  cfg.max_sweeps = 8;
  cfg.aux1 = 2;
  cfg.aux2 = 4;  // case A must allow u2 = (x2, s2)
  MacProblem p = builders::mac_random(rng, MacCase::B, 0.4, 0.7);
  RateRegion rb = compute_region(p, cfg, BoundSide::inner);
  MacProblem pa = p;
  pa.mac_case = MacCase::A;
  RateRegion ra = compute_region(pa, cfg, BoundSide::inner);
  if (!rb.empty) {
    REQUIRE(!ra.empty);
    for (double l : {0.0, 0.25, 0.5, 0.75, 1.0})
      CHECK(support_function(rb, l) <= support_function(ra, l) + 1e-6);
  }
}

TEST_CASE("BC B' inner region is contained in the outer region") {
  KeyStream rng(derive_key({11, 10}));
  SearchConfig cfg;
  cfg.grid_denom = 4;
  cfg.aux_u = 2;
  cfg.aux_v = 2;
  for (int trial = 0; trial < 3; ++trial) {
    BcProblem p = builders::bc_random(rng, BcCase::Bp);
    RateRegion inner = compute_region(p, cfg, BoundSide::inner);
    RateRegion outer = compute_region(p, cfg, BoundSide::outer);
    if (inner.empty) continue;
    for (double l : {0.0, 0.25, 0.5, 0.75, 1.0})
      CHECK(support_function(inner, l) <= support_function(outer, l) + 1e-6);
  }
}

TEST_CASE("BC C' and D' regions share one code path") {
  SearchConfig cfg;
  cfg.aux_u = 2;
  BcProblem pc = builders::bc_clean_forward(0.1, 0.25, BcCase::Cp);
  BcProblem pd = builders::bc_clean_forward(0.1, 0.25, BcCase::Dp);
  RateRegion rc = compute_region(pc, cfg, BoundSide::inner);
  RateRegion rd = compute_region(pd, cfg, BoundSide::inner);
  REQUIRE(rc.hull.size() == rd.hull.size());
  for (std::size_t i = 0; i < rc.hull.size(); ++i) {
    CHECK(rc.hull[i].r1 == rd.hull[i].r1);
    CHECK(rc.hull[i].r2 == rd.hull[i].r2);
  }
}

TEST_CASE("region computation is deterministic across thread counts") {
  MacProblem p = builders::mac_correlated(0.8, 0.05, 0.3);
  for (int threads : {1, 2, 8}) {
    SearchConfig cfg;
    cfg.threads = threads;
    RateRegion r = compute_region(p, cfg, BoundSide::inner);
    static std::vector<RatePoint> reference;
    if (threads == 1) {
      reference = r.hull;
      CHECK(!r.hull.empty());
    } else {
      REQUIRE(r.hull.size() == reference.size());
      for (std::size_t i = 0; i < r.hull.size(); ++i) {
        CHECK(r.hull[i].r1 == reference[i].r1);
        CHECK(r.hull[i].r2 == reference[i].r2);
      }
    }
  }
}

TEST_CASE("single-user reductions") {
  // irreversible embedding into a BSC(0.1) with a degenerate host:
  // max rate = 1 - h(0.1)
  Pmf host(a("s", 1), {1.0});
  std::vector<double> fwd;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) fwd.push_back(y == x ? 0.9 : 0.1);
  Kernel chan({a("x", 2), a("s", 1)}, {a("y", 2)}, fwd);
  DistortionMeasure d(a("s", 1), a("x", 2), {0.0, 0.0});
  SearchConfig cfg;
  const double cap = single_user_irreversible_capacity(host, chan, d, 0.0, cfg);
  CHECK(cap == doctest::Approx(1.0 - h2(0.1)).epsilon(0.01));

  // reversible embedding with a degenerate host over a clean channel:
  // max rate = 1 (host costs nothing, channel is perfect)
  std::vector<double> clean;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) clean.push_back(y == x ? 1.0 : 0.0);
  Kernel cchan({a("x", 2), a("s", 1)}, {a("y", 2)}, clean);
  const double rcap = single_user_reversible_capacity(host, cchan, d, 0.0, cfg);
  CHECK(rcap == doctest::Approx(1.0).epsilon(1e-9));

  // reversible embedding, uniform binary host, clean channel, budget 0.25:
  // rate = max H(X) - H(S) over couplings with E d <= 0.25, which is 0
  Pmf uhost(a("s", 2), {0.5, 0.5});
  std::vector<double> c2;
  for (int x = 0; x < 2; ++x)
    for (int s = 0; s < 2; ++s) {
      (void)s;
      for (int y = 0; y < 2; ++y) c2.push_back(y == x ? 1.0 : 0.0);
    }
  Kernel cs({a("x", 2), a("s", 2)}, {a("y", 2)}, c2);
  DistortionMeasure dh(a("s", 2), a("x", 2), {0, 1, 1, 0});
  const double rcap2 = single_user_reversible_capacity(uhost, cs, dh, 0.25, cfg);
  CHECK(rcap2 == doctest::Approx(0.0).epsilon(1e-9));

  // biased host Bern(0.2), clean channel, budget 0.1: the maximum of
  // H(X) - H(S) over couplings with E d <= 0.1 is h(0.3) - h(0.2),
  // achieved by flipping the heavy symbol with probability 1/8
  Pmf bhost(a("s", 2), {0.8, 0.2});
  const double rcap3 = single_user_reversible_capacity(bhost, cs, dh, 0.1, cfg);
  CHECK(rcap3 == doctest::Approx(h2(0.3) - h2(0.2)).epsilon(1e-6));
}

TEST_CASE("BC C' r2 boundary at a tight budget") {
  // clean y = z = x with a uniform host: recovering the host consumes the
  // whole channel, so max r2 is zero; the grid sweep agrees
  BcProblem p = builders::bc_clean_forward(0.0, 0.11, BcCase::Cp);
  SearchConfig cfg;
  cfg.aux_u = 2;
  RateRegion r = compute_region(p, cfg, BoundSide::inner);
  REQUIRE(!r.empty);
  CHECK(std::abs(support_function(r, 0.0) - 0.0) <= 0.02);
}

TEST_CASE("BC C' boundary against an independent simplex-grid sweep") {
  // uniform binary host, clean y = z = x, budget 0.25: the r2 boundary is
  // max I(X,S;Z) - H(S) over the feasible grid
  BcProblem p = builders::bc_clean_forward(0.0, 0.25, BcCase::Cp);
  SearchConfig cfg;
  cfg.aux_u = 2;
  RateRegion r = compute_region(p, cfg, BoundSide::inner);
  REQUIRE(!r.empty);

  // independent sweep at step 1/16 over p(u, x | s), naive evaluation
  double best_b2 = -1e9;
  const int denom = 16;
  std::vector<std::vector<double>> rows;
  std::vector<int> comp(4, 0);
  std::function<void(int, int)> emit = [&](int pos, int rem) {
    if (pos == 3) {
      comp[3] = rem;
      std::vector<double> row(4);
      for (int i = 0; i < 4; ++i) row[static_cast<std::size_t>(i)] = comp[i] / 16.0;
      rows.push_back(row);
      return;
    }
    for (int v = 0; v <= rem; ++v) {
      comp[pos] = v;
      emit(pos + 1, rem - v);
    }
  };
  emit(0, denom);
  for (const auto& r0 : rows)
    for (const auto& r1 : rows) {
      std::vector<double> table = r0;
      table.insert(table.end(), r1.begin(), r1.end());
      double dist = 0.0;
      for (int s = 0; s < 2; ++s)
        for (int u = 0; u < 2; ++u)
          for (int x = 0; x < 2; ++x)
            dist += 0.5 * table[static_cast<std::size_t>((s * 2 + u) * 2 + x)] *
                    (s == x ? 0.0 : 1.0);
      if (dist > 0.25 + 1e-9) continue;
      Kernel enc({a("s", 2)}, {a("u", 2), a("x", 2)}, table);
      auto nj = oracle::bc_full_joint(p, BcTuple{enc});
      const std::vector<int> S{0}, X{2}, Z{4};
      best_b2 = std::max(best_b2, oracle::mi(nj, {X[0], S[0]}, Z) -
                                      oracle::entropy_of(oracle::marginal(nj, S)));
    }
  CHECK(support_function(r, 0.0) == doctest::Approx(std::max(best_b2, 0.0)).epsilon(0.02));
}
