#include "embedcap/sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "embedcap/parallel.hpp"

namespace embedcap {

namespace {

// key-derivation roles
constexpr std::uint64_t kRoleMacX1 = 0x11;
constexpr std::uint64_t kRoleMacX2 = 0x12;
constexpr std::uint64_t kRoleBcPoolU = 0x21;
constexpr std::uint64_t kRoleBcBinX = 0x22;
constexpr std::uint64_t kRoleBcSupU = 0x31;
constexpr std::uint64_t kRoleBcSupX = 0x32;
constexpr std::uint64_t kRoleTrial = 0x41;

using Names = std::vector<std::string>;

Names names(std::initializer_list<const char*> ns) {
  Names out;
  for (const char* n : ns) out.emplace_back(n);
  return out;
}

std::int64_t pow_checked(int base, int n, std::int64_t limit) {
  std::int64_t v = 1;
  for (int i = 0; i < n; ++i) {
    if (v > limit / base) return limit + 1;
    v *= base;
  }
  return v;
}

Sequence sample_rows(const Kernel& k, std::span<const std::int64_t> row_per_letter,
                     const Alphabet& out_alphabet, KeyStream& rng) {
  std::vector<int> sym(row_per_letter.size());
  for (std::size_t j = 0; j < row_per_letter.size(); ++j)
    sym[j] = sample_index(k.row(row_per_letter[j]), rng.next_unit());
  return Sequence(out_alphabet, std::move(sym));
}

std::int64_t uniform_below(KeyStream& rng, std::int64_t m) {
  const double u = rng.next_unit();
  const auto v = static_cast<std::int64_t>(u * static_cast<double>(m));
  return std::min(v, m - 1);
}

double per_letter_distortion(const Sequence& s, const Sequence& x,
                             const DistortionMeasure& d) {
  double acc = 0.0;
  for (int j = 0; j < s.n(); ++j)
    acc += d.at(s.symbols[static_cast<std::size_t>(j)], x.symbols[static_cast<std::size_t>(j)]);
  return acc / static_cast<double>(s.n());
}

// fallback embedding when an encoder declares failure: per-letter
// minimum-distortion symbol
Sequence min_distortion_fallback(const Sequence& s, const Alphabet& x_alpha,
                                 const DistortionMeasure& d) {
  std::vector<int> sym(static_cast<std::size_t>(s.n()));
  for (int j = 0; j < s.n(); ++j) {
    const int sj = s.symbols[static_cast<std::size_t>(j)];
    int best = 0;
    for (int x = 1; x < x_alpha.size; ++x)
      if (d.at(sj, x) < d.at(sj, best)) best = x;
    sym[static_cast<std::size_t>(j)] = best;
  }
  return Sequence(x_alpha, std::move(sym));
}

// p(last | leading) extracted from a joint over (leading..., last).
Kernel conditional_of(const JointPmf& joint, const Names& given, const std::string& out) {
  Names order = given;
  order.push_back(out);
  JointPmf j = permute_axes(marginalize(joint, order), order);
  std::vector<Alphabet> in_axes;
  for (std::size_t i = 0; i + 1 < j.axes().size(); ++i) in_axes.push_back(j.axes()[i]);
  const Alphabet out_axis = j.axes().back();
  const std::int64_t rows = j.cells() / out_axis.size;
  std::vector<double> table(static_cast<std::size_t>(j.cells()));
  const auto src = j.table();
  for (std::int64_t r = 0; r < rows; ++r) {
    double mass = 0.0;
    for (int c = 0; c < out_axis.size; ++c)
      mass += src[static_cast<std::size_t>(r * out_axis.size + c)];
    for (int c = 0; c < out_axis.size; ++c) {
      table[static_cast<std::size_t>(r * out_axis.size + c)] =
          mass > 0.0 ? src[static_cast<std::size_t>(r * out_axis.size + c)] / mass
                     : 1.0 / out_axis.size;  // unreachable rows: uniform
    }
  }
  return Kernel(std::move(in_axes), {out_axis}, std::move(table));
}

}  // namespace

std::int64_t message_count(int n, double rate) {
  if (rate <= 0.0) return 1;
  const double bits = static_cast<double>(n) * rate;
  if (bits > 40.0) throw BudgetError("message count 2^(n r) exceeds 2^40");
  return static_cast<std::int64_t>(std::ceil(std::exp2(bits)));
}

Sequence sample_iid(const Pmf& p, int n, KeyStream& rng) {
  std::vector<int> sym(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) sym[static_cast<std::size_t>(j)] = sample_index(p.probs(), rng.next_unit());
  return Sequence(p.alphabet(), std::move(sym));
}

Sequence sample_channel(const Kernel& k, std::span<const Sequence> inputs, KeyStream& rng) {
  if (inputs.size() != k.inputs().size())
    throw SpecError("sample_channel: wrong number of input sequences");
  const int n = inputs[0].n();
  for (const auto& s : inputs)
    if (s.n() != n) throw SpecError("sample_channel: input length mismatch");
  std::vector<std::int64_t> rows(static_cast<std::size_t>(n), 0);
  for (int j = 0; j < n; ++j) {
    std::int64_t r = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i)
      r = r * k.inputs()[i].size + inputs[i].symbols[static_cast<std::size_t>(j)];
    rows[static_cast<std::size_t>(j)] = r;
  }
  if (k.outputs().size() != 1)
    throw SpecError("sample_channel: single output axis expected");
  return sample_rows(k, rows, k.outputs()[0], rng);
}

// ---------------------------------------------------------------- MAC

MacCodebook::MacCodebook(const MacProblem& p, const MacInnerTuple& t,
                         const SimConfig& cfg)
    : problem_(&p),
      enc1_(t.enc1),
      enc2_(t.enc2),
      seed_(cfg.seed),
      m1_(message_count(cfg.n, cfg.r1)),
      m2_(message_count(cfg.n, cfg.r2)),
      full_joint_(JointPmf({Alphabet{"q", 1}}, {1.0})) {
  validate(p);
  if (t.enc1.outputs().size() != 1 || t.enc2.outputs().size() != 1)
    throw SpecError("MAC case C simulation tuples carry no auxiliaries");
  JointPmf q({Alphabet{"q", 1}}, {1.0});
  Kernel host_k({}, {p.host.axes()[0], p.host.axes()[1]},
                std::vector<double>(p.host.table().begin(), p.host.table().end()));
  JointPmf j = chain(q, host_k);
  j = chain(j, enc1_);
  j = chain(j, enc2_);
  full_joint_ = chain(j, p.channel);  // (q, s1, s2, x1, x2, y)
}

Sequence MacCodebook::time_share(int n) const {
  return Sequence(Alphabet{"q", 1}, std::vector<int>(static_cast<std::size_t>(n), 0));
}

Sequence MacCodebook::encode1(const Sequence& q, const Sequence& s1,
                              std::int64_t m) const {
  KeyStream rng(derive_key({seed_, kRoleMacX1, hash_symbols(q.symbols),
                            hash_symbols(s1.symbols), static_cast<std::uint64_t>(m)}));
  std::vector<std::int64_t> rows(s1.symbols.begin(), s1.symbols.end());
  return sample_rows(enc1_, rows, enc1_.outputs()[0], rng);
}

Sequence MacCodebook::encode2(const Sequence& q, const Sequence& s2,
                              std::int64_t m) const {
  KeyStream rng(derive_key({seed_, kRoleMacX2, hash_symbols(q.symbols),
                            hash_symbols(s2.symbols), static_cast<std::uint64_t>(m)}));
  std::vector<std::int64_t> rows(s2.symbols.begin(), s2.symbols.end());
  return sample_rows(enc2_, rows, enc2_.outputs()[0], rng);
}

MacDecodeOutput mac_caseC_decode(const MacCodebook& cb, const Sequence& q,
                                 const Sequence& y, const TypicalityParams& params,
                                 std::int64_t budget) {
  const MacProblem& p = cb.problem();
  const int n = y.n();
  const Alphabet s1a = p.host.axes()[0], s2a = p.host.axes()[1];
  if (pow_checked(s1a.size * s2a.size, n, budget) > budget)
    throw BudgetError("host-candidate enumeration exceeds the decode budget");

  // all host pairs in T_eps1[s1, s2], via the packed product alphabet
  const Alphabet packed = product_alphabet(p.host.axes(), "s1s2");
  const Pmf packed_host(packed,
                        std::vector<double>(p.host.table().begin(), p.host.table().end()));
  const std::vector<Alphabet> parts = {s1a, s2a};
  auto packed_cands = typical_set(packed_host, n, params.eps1, budget);

  const TypicalityTest full_test(cb.full_joint(), n, params.eps);
  const Names prune_names = names({"q", "s1", "s2", "x1", "y"});
  const TypicalityTest prune_test(marginalize(cb.full_joint(), prune_names), n, params.eps);

  MacDecodeOutput found;
  int hits = 0;
  for (const auto& cand : packed_cands) {
    auto pair = unpack_sequence(cand, parts);
    const Sequence& s1 = pair[0];
    const Sequence& s2 = pair[1];
    for (std::int64_t m1 = 0; m1 < cb.m1_count(); ++m1) {
      const Sequence x1 = cb.encode1(q, s1, m1);
      // joint typicality implies marginal typicality, so candidates failing
      // the (q,s1,s2,x1,y) marginal cannot succeed for any m2
      const Sequence prune_tuple[5] = {q, s1, s2, x1, y};
      if (!prune_test.check(prune_tuple)) continue;
      for (std::int64_t m2 = 0; m2 < cb.m2_count(); ++m2) {
        const Sequence x2 = cb.encode2(q, s2, m2);
        const Sequence tuple[6] = {q, s1, s2, x1, x2, y};
        if (!full_test.check(tuple)) continue;
        ++hits;
        if (hits > 1) {
          MacDecodeOutput out;
          out.outcome = TrialOutcome::decode_ambiguous;
          return out;
        }
        found.outcome = TrialOutcome::ok;
        found.m1 = m1;
        found.m2 = m2;
        found.s1 = s1.symbols;
        found.s2 = s2.symbols;
      }
    }
  }
  if (hits == 0) {
    MacDecodeOutput out;
    out.outcome = TrialOutcome::decode_none_typical;
    return out;
  }
  return found;
}

// ---------------------------------------------------------------- BC B'

BcBinnedCodebook::BcBinnedCodebook(const BcProblem& p, const BcTuple& t,
                                   const SimConfig& cfg)
    : problem_(&p),
      seed_(cfg.seed),
      m1_(message_count(cfg.n, cfg.r1)),
      m2_(message_count(cfg.n, cfg.r2)),
      bin_size_(0),
      u_marginal_(Alphabet{"u", 1}, {1.0}),
      x_given_us_({}, {Alphabet{"x", 1}}, {1.0}),
      full_joint_(JointPmf({Alphabet{"q", 1}}, {1.0})) {
  validate(p);
  if (t.enc.outputs().size() != 2 || t.enc.outputs()[0].name != "u")
    throw SpecError("BC case B' tuple must emit (u, x)");
  JointPmf sux = chain(JointPmf::from_pmf(p.host), t.enc);  // (s, u, x)
  full_joint_ = chain(chain(sux, p.forward), p.degrade);    // (s, u, x, y, z)

  const Names just_u = names({"u"});
  u_marginal_ = marginalize(sux, just_u).as_pmf();
  x_given_us_ = conditional_of(sux, names({"u", "s"}), "x");

  InfoCalc calc(sux);
  const double i_us = calc.I(calc.mask_of(names({"u"})), calc.mask_of(names({"s"})));
  const double bits = static_cast<double>(cfg.n) * (i_us + cfg.eps);
  if (bits > 40.0) throw BudgetError("bin size 2^{n(I(U;S)+eps)} exceeds 2^40");
  bin_size_ = static_cast<std::int64_t>(std::ceil(std::exp2(bits)));
}

Sequence BcBinnedCodebook::pool_u(std::int64_t pool_idx, int n) const {
  KeyStream rng(derive_key({seed_, kRoleBcPoolU, static_cast<std::uint64_t>(pool_idx)}));
  return sample_iid(u_marginal_, n, rng);
}

Sequence BcBinnedCodebook::codeword_x(const Sequence& s, std::int64_t pool_idx,
                                      std::int64_t m1) const {
  const Sequence u = pool_u(pool_idx, s.n());
  KeyStream rng(derive_key({seed_, kRoleBcBinX, hash_symbols(s.symbols),
                            static_cast<std::uint64_t>(pool_idx),
                            static_cast<std::uint64_t>(m1)}));
  std::vector<std::int64_t> rows(static_cast<std::size_t>(s.n()));
  for (int j = 0; j < s.n(); ++j)
    rows[static_cast<std::size_t>(j)] =
        static_cast<std::int64_t>(u.symbols[static_cast<std::size_t>(j)]) *
            problem_->host.alphabet().size +
        s.symbols[static_cast<std::size_t>(j)];
  return sample_rows(x_given_us_, rows, x_given_us_.outputs()[0], rng);
}

BcEncodeOutput bc_caseB_encode(const BcBinnedCodebook& cb, const Sequence& s,
                               std::int64_t w1, std::int64_t w2,
                               const TypicalityParams& params) {
  BcEncodeOutput out;
  if (!is_strongly_typical(s, cb.problem().host, params.eps)) {
    out.outcome = TrialOutcome::encode_host_atypical;
    return out;
  }
  const Names su = names({"s", "u"});
  const JointPmf su_joint = marginalize(cb.full_joint(), su);
  const TypicalityTest su_test(su_joint, s.n(), params.eps);
  for (std::int64_t i = w2 * cb.bin_size(); i < (w2 + 1) * cb.bin_size(); ++i) {
    const Sequence u = cb.pool_u(i, s.n());
    const Sequence tuple[2] = {s, u};
    if (su_test.check(tuple)) {
      out.outcome = TrialOutcome::ok;
      out.pool_idx = i;
      out.u = u;
      out.x = cb.codeword_x(s, i, w1);
      return out;
    }
  }
  out.outcome = TrialOutcome::encode_bin_exhausted;
  return out;
}

BcDecode1Output bc_caseB_decode1(const BcBinnedCodebook& cb, const Sequence& y,
                                 const TypicalityParams& params, std::int64_t budget) {
  const int n = y.n();
  BcDecode1Output out;
  if (cb.pool_size() > budget)
    throw BudgetError("pool scan exceeds the decode budget");

  // stage 1: unique pool sequence typical with y
  const TypicalityTest uy_test(marginalize(cb.full_joint(), names({"u", "y"})), n,
                               params.eps);
  std::int64_t hit = -1;
  for (std::int64_t i = 0; i < cb.pool_size(); ++i) {
    const Sequence u = cb.pool_u(i, n);
    const Sequence tuple[2] = {u, y};
    if (!uy_test.check(tuple)) continue;
    if (hit >= 0) {
      out.outcome = TrialOutcome::decode_ambiguous;
      return out;
    }
    hit = i;
  }
  if (hit < 0) {
    out.outcome = TrialOutcome::decode_none_typical;
    return out;
  }
  const Sequence u = cb.pool_u(hit, n);
  const std::int64_t m2 = hit / cb.bin_size();

  // stage 2: unique (m1, s^n) among hosts conditionally typical with u^n
  const JointPmf us = permute_axes(marginalize(cb.full_joint(), names({"s", "u"})),
                                   names({"u", "s"}));
  const Sequence fixed[1] = {u};
  auto s_cands = conditional_typical_candidates(us, fixed, params.eps, budget);

  const TypicalityTest suxy_test(marginalize(cb.full_joint(), names({"s", "u", "x", "y"})),
                                 n, params.eps);
  int hits = 0;
  for (const auto& s : s_cands) {
    for (std::int64_t m1 = 0; m1 < cb.m1_count(); ++m1) {
      const Sequence x = cb.codeword_x(s, hit, m1);
      const Sequence tuple[4] = {s, u, x, y};
      if (!suxy_test.check(tuple)) continue;
      ++hits;
      if (hits > 1) {
        out.outcome = TrialOutcome::decode_ambiguous;
        return out;
      }
      out.m1 = m1;
      out.m2 = m2;
      out.s = s.symbols;
    }
  }
  if (hits == 0) {
    out.outcome = TrialOutcome::decode_none_typical;
    return out;
  }
  out.outcome = TrialOutcome::ok;
  return out;
}

BcDecode2Output bc_caseB_decode2(const BcBinnedCodebook& cb, const Sequence& z,
                                 const TypicalityParams& params) {
  const int n = z.n();
  BcDecode2Output out;
  const TypicalityTest uz_test(marginalize(cb.full_joint(), names({"u", "z"})), n,
                               params.eps);
  std::int64_t hit = -1;
  for (std::int64_t i = 0; i < cb.pool_size(); ++i) {
    const Sequence u = cb.pool_u(i, n);
    const Sequence tuple[2] = {u, z};
    if (!uz_test.check(tuple)) continue;
    if (hit >= 0) {
      out.outcome = TrialOutcome::decode_ambiguous;
      return out;
    }
    hit = i;
  }
  if (hit < 0) {
    out.outcome = TrialOutcome::decode_none_typical;
    return out;
  }
  out.outcome = TrialOutcome::ok;
  out.m2 = hit / cb.bin_size();
  return out;
}

// ---------------------------------------------------------------- BC C'

BcSuperpositionCodebook::BcSuperpositionCodebook(const BcProblem& p, const BcTuple& t,
                                                 const SimConfig& cfg)
    : problem_(&p),
      seed_(cfg.seed),
      m1_(message_count(cfg.n, cfg.r1)),
      m2_(message_count(cfg.n, cfg.r2)),
      u_given_s_({}, {Alphabet{"u", 1}}, {1.0}),
      x_given_us_({}, {Alphabet{"x", 1}}, {1.0}),
      full_joint_(JointPmf({Alphabet{"q", 1}}, {1.0})) {
  validate(p);
  if (t.enc.outputs().size() != 2 || t.enc.outputs()[0].name != "u")
    throw SpecError("BC case C' tuple must emit (u, x)");
  JointPmf sux = chain(JointPmf::from_pmf(p.host), t.enc);  // (s, u, x)
  full_joint_ = chain(chain(sux, p.forward), p.degrade);
  u_given_s_ = conditional_of(sux, names({"s"}), "u");
  x_given_us_ = conditional_of(sux, names({"u", "s"}), "x");
}

Sequence BcSuperpositionCodebook::codeword_u(const Sequence& s, std::int64_t m2) const {
  KeyStream rng(derive_key({seed_, kRoleBcSupU, hash_symbols(s.symbols),
                            static_cast<std::uint64_t>(m2)}));
  std::vector<std::int64_t> rows(s.symbols.begin(), s.symbols.end());
  return sample_rows(u_given_s_, rows, u_given_s_.outputs()[0], rng);
}

Sequence BcSuperpositionCodebook::codeword_x(const Sequence& s, std::int64_t m1,
                                             std::int64_t m2) const {
  const Sequence u = codeword_u(s, m2);
  KeyStream rng(derive_key({seed_, kRoleBcSupX, hash_symbols(s.symbols),
                            static_cast<std::uint64_t>(m2),
                            static_cast<std::uint64_t>(m1)}));
  std::vector<std::int64_t> rows(static_cast<std::size_t>(s.n()));
  for (int j = 0; j < s.n(); ++j)
    rows[static_cast<std::size_t>(j)] =
        static_cast<std::int64_t>(u.symbols[static_cast<std::size_t>(j)]) *
            problem_->host.alphabet().size +
        s.symbols[static_cast<std::size_t>(j)];
  return sample_rows(x_given_us_, rows, x_given_us_.outputs()[0], rng);
}

Sequence bc_caseC_encode(const BcSuperpositionCodebook& cb, const Sequence& s,
                         std::int64_t w1, std::int64_t w2) {
  return cb.codeword_x(s, w1, w2);
}

BcDecode1Output bc_caseC_decode1(const BcSuperpositionCodebook& cb, const Sequence& y,
                                 const TypicalityParams& params, std::int64_t budget) {
  const int n = y.n();
  BcDecode1Output out;
  auto s_cands = typical_set(cb.problem().host, n, params.eps1, budget);

  const TypicalityTest suy_test(marginalize(cb.full_joint(), names({"s", "u", "y"})), n,
                                params.eps);
  // stage 1: unique (s^n, m2) whose cloud center is typical with y
  int hits = 0;
  std::int64_t best_m2 = -1;
  const Sequence* best_s = nullptr;
  for (const auto& s : s_cands) {
    for (std::int64_t m2 = 0; m2 < cb.m2_count(); ++m2) {
      const Sequence u = cb.codeword_u(s, m2);
      const Sequence tuple[3] = {s, u, y};
      if (!suy_test.check(tuple)) continue;
      ++hits;
      if (hits > 1) {
        out.outcome = TrialOutcome::decode_ambiguous;
        return out;
      }
      best_m2 = m2;
      best_s = &s;
    }
  }
  if (hits == 0) {
    out.outcome = TrialOutcome::decode_none_typical;
    return out;
  }

  // stage 2: unique refinement codeword typical with y
  const Sequence u = cb.codeword_u(*best_s, best_m2);
  const TypicalityTest suxy_test(marginalize(cb.full_joint(), names({"s", "u", "x", "y"})),
                                 n, params.eps);
  int m1_hits = 0;
  std::int64_t best_m1 = -1;
  for (std::int64_t m1 = 0; m1 < cb.m1_count(); ++m1) {
    const Sequence x = cb.codeword_x(*best_s, m1, best_m2);
    const Sequence tuple[4] = {*best_s, u, x, y};
    if (!suxy_test.check(tuple)) continue;
    ++m1_hits;
    if (m1_hits > 1) {
      out.outcome = TrialOutcome::decode_ambiguous;
      return out;
    }
    best_m1 = m1;
  }
  if (m1_hits == 0) {
    out.outcome = TrialOutcome::decode_none_typical;
    return out;
  }
  out.outcome = TrialOutcome::ok;
  out.m1 = best_m1;
  out.m2 = best_m2;
  out.s = best_s->symbols;
  return out;
}

BcDecode2Output bc_caseC_decode2(const BcSuperpositionCodebook& cb, const Sequence& z,
                                 const TypicalityParams& params, std::int64_t budget) {
  const int n = z.n();
  BcDecode2Output out;
  auto s_cands = typical_set(cb.problem().host, n, params.eps1, budget);
  const TypicalityTest suz_test(marginalize(cb.full_joint(), names({"s", "u", "z"})), n,
                                params.eps);
  int hits = 0;
  for (const auto& s : s_cands) {
    for (std::int64_t m2 = 0; m2 < cb.m2_count(); ++m2) {
      const Sequence u = cb.codeword_u(s, m2);
      const Sequence tuple[3] = {s, u, z};
      if (!suz_test.check(tuple)) continue;
      ++hits;
      if (hits > 1) {
        out.outcome = TrialOutcome::decode_ambiguous;
        return out;
      }
      out.m2 = m2;
      out.s = s.symbols;
    }
  }
  if (hits == 0) {
    out.outcome = TrialOutcome::decode_none_typical;
    return out;
  }
  out.outcome = TrialOutcome::ok;
  return out;
}

// ----------------------------------------------------------------- driver

namespace {

struct TrialAccumulator {
  std::vector<TrialOutcome> outcomes;
  std::vector<std::vector<double>> distortion;  // [encoder][trial]
  std::vector<char> bound_held;

  explicit TrialAccumulator(int trials, int encoders)
      : outcomes(static_cast<std::size_t>(trials), TrialOutcome::ok),
        distortion(static_cast<std::size_t>(encoders),
                   std::vector<double>(static_cast<std::size_t>(trials), 0.0)),
        bound_held(static_cast<std::size_t>(trials), 1) {}

  SimReport finish() const {
    SimReport r;
    r.trials_run = static_cast<long long>(outcomes.size());
    for (const auto o : outcomes) {
      if (o != TrialOutcome::ok) {
        ++r.errors;
        ++r.breakdown[static_cast<std::size_t>(o)];
      }
    }
    r.empirical_error =
        r.trials_run == 0 ? 0.0
                          : static_cast<double>(r.errors) / static_cast<double>(r.trials_run);
    for (const auto& enc : distortion) {
      double acc = 0.0;
      for (double v : enc) acc += v;
      r.avg_distortion.push_back(enc.empty() ? 0.0 : acc / static_cast<double>(enc.size()));
    }
    for (char held : bound_held)
      if (!held) r.typical_distortion_bound_held = false;
    return r;
  }
};

// d <= E d + eps d_max must hold whenever (s^n, x^n) is jointly typical
bool distortion_bound_check(const Sequence& s, const Sequence& x, const JointPmf& sx_joint,
                            const DistortionMeasure& d, double eps, double measured) {
  const Sequence tuple[2] = {s, x};
  if (!is_jointly_typical(tuple, sx_joint, eps)) return true;
  const double expect = expected_distortion(sx_joint, d);
  return measured <= expect + eps * d.d_max + 1e-12;
}

}  // namespace

SimReport simulate(const MacProblem& p, SimScheme scheme, const MacInnerTuple& t,
                   const SimConfig& cfg) {
  if (scheme != SimScheme::mac_case_c || p.mac_case != MacCase::C)
    throw SpecError("MAC simulation implements case C only");
  TypicalityParams params(cfg.eps, cfg.eps1);
  MacCodebook cb(p, t, cfg);
  const int n = cfg.n;
  if (pow_checked(p.host.axes()[0].size * p.host.axes()[1].size, n, cfg.decode_budget) >
      cfg.decode_budget)
    throw BudgetError("host-candidate enumeration exceeds the decode budget");

  const Names s1x1 = names({"s1", "x1"});
  const Names s2x2 = names({"s2", "x2"});
  const JointPmf sx1 = marginalize(cb.full_joint(), s1x1);
  const JointPmf sx2 = marginalize(cb.full_joint(), s2x2);
  const Pmf packed_host(product_alphabet(p.host.axes(), "s1s2"),
                        std::vector<double>(p.host.table().begin(), p.host.table().end()));
  const std::vector<Alphabet> parts = {p.host.axes()[0], p.host.axes()[1]};

  TrialAccumulator acc(cfg.trials, 2);
  parallel_for(cfg.trials, cfg.threads, [&](std::int64_t trial) {
    KeyStream rng(derive_key({cfg.seed, kRoleTrial, static_cast<std::uint64_t>(trial)}));
    const Sequence q = cb.time_share(n);
    const Sequence packed = sample_iid(packed_host, n, rng);
    auto hosts = unpack_sequence(packed, parts);
    const Sequence& s1 = hosts[0];
    const Sequence& s2 = hosts[1];
    const std::int64_t w1 = uniform_below(rng, cb.m1_count());
    const std::int64_t w2 = uniform_below(rng, cb.m2_count());

    const Sequence x1 = cb.encode1(q, s1, w1);
    const Sequence x2 = cb.encode2(q, s2, w2);
    const Sequence chan_in[4] = {x1, s1, x2, s2};
    const Sequence y = sample_channel(p.channel, chan_in, rng);

    auto out = mac_caseC_decode(cb, q, y, params, cfg.decode_budget);
    TrialOutcome result = out.outcome;
    if (out.outcome == TrialOutcome::ok) {
      if (out.m1 != w1 || out.m2 != w2)
        result = TrialOutcome::wrong_message;
      else if (out.s1 != s1.symbols || out.s2 != s2.symbols)
        result = TrialOutcome::wrong_host;
    }
    acc.outcomes[static_cast<std::size_t>(trial)] = result;

    const double d1 = per_letter_distortion(s1, x1, p.d1);
    const double d2 = per_letter_distortion(s2, x2, p.d2);
    acc.distortion[0][static_cast<std::size_t>(trial)] = d1;
    acc.distortion[1][static_cast<std::size_t>(trial)] = d2;
    if (!distortion_bound_check(s1, x1, sx1, p.d1, cfg.eps, d1) ||
        !distortion_bound_check(s2, x2, sx2, p.d2, cfg.eps, d2))
      acc.bound_held[static_cast<std::size_t>(trial)] = 0;
  });
  return acc.finish();
}

SimReport simulate(const BcProblem& p, SimScheme scheme, const BcTuple& t,
                   const SimConfig& cfg) {
  TypicalityParams params(cfg.eps, cfg.eps1);
  const int n = cfg.n;

  if (scheme == SimScheme::bc_case_b) {
    if (p.bc_case != BcCase::Bp)
      throw SpecError("binned-codebook simulation requires BC case B'");
  } else if (scheme == SimScheme::bc_case_c) {
    if (p.bc_case != BcCase::Cp && p.bc_case != BcCase::Dp)
      throw SpecError("superposition simulation requires BC case C' or D'");
  } else {
    throw SpecError("scheme does not apply to a BC problem");
  }
  if (pow_checked(p.host.alphabet().size, n, cfg.decode_budget) > cfg.decode_budget)
    throw BudgetError("host-candidate enumeration exceeds the decode budget");

  TrialAccumulator acc(cfg.trials, 1);

  if (scheme == SimScheme::bc_case_b) {
    BcBinnedCodebook cb(p, t, cfg);
    if (cb.pool_size() > cfg.decode_budget)
      throw BudgetError("pool scan exceeds the decode budget");
    const JointPmf sx = marginalize(cb.full_joint(), names({"s", "x"}));

    parallel_for(cfg.trials, cfg.threads, [&](std::int64_t trial) {
      KeyStream rng(derive_key({cfg.seed, kRoleTrial, static_cast<std::uint64_t>(trial)}));
      const Sequence s = sample_iid(p.host, n, rng);
      const std::int64_t w1 = uniform_below(rng, cb.m1_count());
      const std::int64_t w2 = uniform_below(rng, cb.m2_count());

      auto enc = bc_caseB_encode(cb, s, w1, w2, params);
      const Sequence x = enc.outcome == TrialOutcome::ok
                             ? *enc.x
                             : min_distortion_fallback(s, p.forward.inputs()[0], p.d);
      const Sequence fwd_in[2] = {x, s};
      const Sequence y = sample_channel(p.forward, fwd_in, rng);
      const Sequence deg_in[1] = {y};
      const Sequence z = sample_channel(p.degrade, deg_in, rng);

      TrialOutcome result = enc.outcome;
      if (result == TrialOutcome::ok) {
        auto o1 = bc_caseB_decode1(cb, y, params, cfg.decode_budget);
        auto o2 = bc_caseB_decode2(cb, z, params);
        if (o1.outcome == TrialOutcome::decode_none_typical ||
            o2.outcome == TrialOutcome::decode_none_typical)
          result = TrialOutcome::decode_none_typical;
        else if (o1.outcome == TrialOutcome::decode_ambiguous ||
                 o2.outcome == TrialOutcome::decode_ambiguous)
          result = TrialOutcome::decode_ambiguous;
        else if (o1.m1 != w1 || o1.m2 != w2 || o2.m2 != w2)
          result = TrialOutcome::wrong_message;
        else if (o1.s != s.symbols)
          result = TrialOutcome::wrong_host;
      }
      acc.outcomes[static_cast<std::size_t>(trial)] = result;

      const double d = per_letter_distortion(s, x, p.d);
      acc.distortion[0][static_cast<std::size_t>(trial)] = d;
      if (enc.outcome == TrialOutcome::ok &&
          !distortion_bound_check(s, x, sx, p.d, cfg.eps, d))
        acc.bound_held[static_cast<std::size_t>(trial)] = 0;
    });
    return acc.finish();
  }

  BcSuperpositionCodebook cb(p, t, cfg);
  const JointPmf sx = marginalize(cb.full_joint(), names({"s", "x"}));
  parallel_for(cfg.trials, cfg.threads, [&](std::int64_t trial) {
    KeyStream rng(derive_key({cfg.seed, kRoleTrial, static_cast<std::uint64_t>(trial)}));
    const Sequence s = sample_iid(p.host, n, rng);
    const std::int64_t w1 = uniform_below(rng, cb.m1_count());
    const std::int64_t w2 = uniform_below(rng, cb.m2_count());

    const Sequence x = bc_caseC_encode(cb, s, w1, w2);
    const Sequence fwd_in[2] = {x, s};
    const Sequence y = sample_channel(p.forward, fwd_in, rng);
    const Sequence deg_in[1] = {y};
    const Sequence z = sample_channel(p.degrade, deg_in, rng);

    auto o1 = bc_caseC_decode1(cb, y, params, cfg.decode_budget);
    auto o2 = bc_caseC_decode2(cb, z, params, cfg.decode_budget);
    TrialOutcome result = TrialOutcome::ok;
    if (o1.outcome == TrialOutcome::decode_none_typical ||
        o2.outcome == TrialOutcome::decode_none_typical)
      result = TrialOutcome::decode_none_typical;
    else if (o1.outcome == TrialOutcome::decode_ambiguous ||
             o2.outcome == TrialOutcome::decode_ambiguous)
      result = TrialOutcome::decode_ambiguous;
    else if (o1.m1 != w1 || o1.m2 != w2 || o2.m2 != w2)
      result = TrialOutcome::wrong_message;
    else if (o1.s != s.symbols || o2.s != s.symbols)
      result = TrialOutcome::wrong_host;
    acc.outcomes[static_cast<std::size_t>(trial)] = result;

    const double d = per_letter_distortion(s, x, p.d);
    acc.distortion[0][static_cast<std::size_t>(trial)] = d;
    if (!distortion_bound_check(s, x, sx, p.d, cfg.eps, d))
      acc.bound_held[static_cast<std::size_t>(trial)] = 0;
  });
  return acc.finish();
}

}  // namespace embedcap
