#include "embedcap/typicality.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace embedcap {

namespace {

// Canonical deviation predicate: |N - n p| < n eps / D, evaluated as
// |N*D - n*p*D| < n*eps so integer counts meet one floating product.
inline bool count_ok(std::int64_t count, int n, double p, double denom, double eps) {
  const double lhs = std::abs(static_cast<double>(count) * denom -
                              static_cast<double>(n) * p * denom);
  return lhs < static_cast<double>(n) * eps;
}

void check_same_length(std::span<const Sequence> seqs) {
  if (seqs.empty()) throw SpecError("need at least one sequence");
  for (const auto& s : seqs)
    if (s.n() != seqs[0].n()) throw SpecError("sequence length mismatch");
}

}  // namespace

Sequence::Sequence(Alphabet a, std::vector<int> syms)
    : alphabet(std::move(a)), symbols(std::move(syms)) {
  if (symbols.empty()) throw SpecError("sequence must have length >= 1");
  for (int s : symbols)
    if (s < 0 || s >= alphabet.size)
      throw SpecError("sequence symbol out of range for '" + alphabet.name + "'");
}

TypicalityParams::TypicalityParams(double e, double e1) : eps(e), eps1(e1) {
  if (!(0.0 < eps1 && eps1 < eps))
    throw SpecError("typicality params require 0 < eps1 < eps");
}

Alphabet product_alphabet(std::span<const Alphabet> parts, const std::string& name) {
  std::int64_t size = 1;
  for (const auto& a : parts) {
    if (size > max_table_cells() / a.size) throw SpecError("product alphabet too large");
    size *= a.size;
  }
  return Alphabet{name, static_cast<int>(size)};
}

Sequence pack_sequences(std::span<const Sequence> seqs, const Alphabet& packed) {
  check_same_length(seqs);
  const int n = seqs[0].n();
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    std::int64_t v = 0;
    for (const auto& s : seqs) v = v * s.alphabet.size + s.symbols[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(j)] = static_cast<int>(v);
  }
  return Sequence(packed, std::move(out));
}

std::vector<Sequence> unpack_sequence(const Sequence& packed,
                                      std::span<const Alphabet> parts) {
  const int n = packed.n();
  std::vector<std::vector<int>> syms(parts.size(), std::vector<int>(static_cast<std::size_t>(n)));
  for (int j = 0; j < n; ++j) {
    std::int64_t v = packed.symbols[static_cast<std::size_t>(j)];
    for (int i = static_cast<int>(parts.size()) - 1; i >= 0; --i) {
      syms[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          static_cast<int>(v % parts[i].size);
      v /= parts[i].size;
    }
  }
  std::vector<Sequence> out;
  out.reserve(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i)
    out.emplace_back(parts[i], std::move(syms[i]));
  return out;
}

std::vector<std::int64_t> empirical_counts(std::span<const Sequence> seqs) {
  check_same_length(seqs);
  std::int64_t cells = 1;
  for (const auto& s : seqs) cells *= s.alphabet.size;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(cells), 0);
  const int n = seqs[0].n();
  for (int j = 0; j < n; ++j) {
    std::int64_t c = 0;
    for (const auto& s : seqs) c = c * s.alphabet.size + s.symbols[static_cast<std::size_t>(j)];
    ++counts[static_cast<std::size_t>(c)];
  }
  return counts;
}

bool is_strongly_typical(const Sequence& x, const Pmf& p, double eps) {
  if (!(x.alphabet == p.alphabet())) throw SpecError("typicality: alphabet mismatch");
  const Sequence* seqs = &x;
  auto counts = empirical_counts(std::span<const Sequence>(seqs, 1));
  const int n = x.n();
  const double denom = static_cast<double>(p.size());
  for (int a = 0; a < p.size(); ++a) {
    if (p[a] > 0.0) {
      if (!count_ok(counts[static_cast<std::size_t>(a)], n, p[a], denom, eps)) return false;
    } else if (counts[static_cast<std::size_t>(a)] != 0) {
      return false;
    }
  }
  return true;
}

bool is_jointly_typical(std::span<const Sequence> seqs, const JointPmf& joint,
                        double eps) {
  if (static_cast<int>(seqs.size()) != joint.rank())
    throw SpecError("joint typicality: sequence/axis count mismatch");
  for (int i = 0; i < joint.rank(); ++i)
    if (!(seqs[static_cast<std::size_t>(i)].alphabet == joint.axes()[static_cast<std::size_t>(i)]))
      throw SpecError("joint typicality: axis mismatch at position " + std::to_string(i));
  auto counts = empirical_counts(seqs);
  const int n = seqs[0].n();
  double denom = 1.0;
  for (const auto& a : joint.axes()) denom *= a.size;
  const auto table = joint.table();
  for (std::int64_t c = 0; c < joint.cells(); ++c) {
    const double p = table[static_cast<std::size_t>(c)];
    if (p > 0.0) {
      if (!count_ok(counts[static_cast<std::size_t>(c)], n, p, denom, eps)) return false;
    } else if (counts[static_cast<std::size_t>(c)] != 0) {
      return false;
    }
  }
  return true;
}

TypicalityTest::TypicalityTest(const JointPmf& joint, int n, double eps)
    : joint_(joint), n_(n) {
  double denom = 1.0;
  for (const auto& a : joint_.axes()) denom *= a.size;
  const auto table = joint_.table();
  lo_.assign(static_cast<std::size_t>(joint_.cells()), 0);
  hi_.assign(static_cast<std::size_t>(joint_.cells()), 0);
  for (std::int64_t c = 0; c < joint_.cells(); ++c) {
    const double p = table[static_cast<std::size_t>(c)];
    if (p <= 0.0) continue;  // window stays [0,0]
    // Scan for the admissible window with the canonical predicate so this
    // path agrees bit-for-bit with is_jointly_typical.
    std::int64_t lo = -1, hi = -2;
    for (std::int64_t cnt = 0; cnt <= n; ++cnt) {
      if (count_ok(cnt, n, p, denom, eps)) {
        if (lo < 0) lo = cnt;
        hi = cnt;
      } else if (lo >= 0) {
        break;
      }
    }
    lo_[static_cast<std::size_t>(c)] = lo;  // lo=-1,hi=-2 marks an empty window
    hi_[static_cast<std::size_t>(c)] = hi;
  }
}

bool TypicalityTest::check_counts(std::span<const std::int64_t> counts) const {
  // zero-probability cells carry window [0,0]
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] < lo_[c] || counts[c] > hi_[c]) return false;
  return true;
}

bool TypicalityTest::check(std::span<const Sequence> seqs) const {
  auto counts = empirical_counts(seqs);
  return check_counts(counts);
}

std::vector<Sequence> conditional_typical_candidates(const JointPmf& joint,
                                                     std::span<const Sequence> fixed,
                                                     double eps, std::int64_t n_limit) {
  const int rank = joint.rank();
  if (static_cast<int>(fixed.size()) != rank - 1)
    throw SpecError("conditional candidates: need one fixed sequence per leading axis");
  check_same_length(fixed);
  const int n = fixed[0].n();
  const Alphabet& last = joint.axes().back();

  // enumeration guard: |last|^n <= n_limit
  std::int64_t total = 1;
  for (int j = 0; j < n; ++j) {
    if (total > n_limit / last.size)
      throw BudgetError("candidate enumeration |" + last.name + "|^n exceeds budget");
    total *= last.size;
  }
  if (total > n_limit) throw BudgetError("candidate enumeration exceeds budget");

  TypicalityTest test(joint, n, eps);
  std::vector<Sequence> out;
  std::vector<Sequence> tuple(fixed.begin(), fixed.end());
  std::vector<int> sym(static_cast<std::size_t>(n), 0);
  tuple.emplace_back(last, sym);
  for (std::int64_t v = 0; v < total; ++v) {
    std::int64_t rem = v;
    auto& cand = tuple.back().symbols;
    for (int j = n - 1; j >= 0; --j) {
      cand[static_cast<std::size_t>(j)] = static_cast<int>(rem % last.size);
      rem /= last.size;
    }
    if (test.check(tuple)) out.push_back(tuple.back());
  }
  return out;
}

std::vector<Sequence> typical_set(const Pmf& p, int n, double eps, std::int64_t n_limit) {
  const Alphabet& a = p.alphabet();
  std::int64_t total = 1;
  for (int j = 0; j < n; ++j) {
    if (total > n_limit / a.size)
      throw BudgetError("typical-set enumeration |" + a.name + "|^n exceeds budget");
    total *= a.size;
  }
  JointPmf joint = JointPmf::from_pmf(p);
  TypicalityTest test(joint, n, eps);
  std::vector<Sequence> out;
  std::vector<Sequence> tuple;
  tuple.emplace_back(a, std::vector<int>(static_cast<std::size_t>(n), 0));
  for (std::int64_t v = 0; v < total; ++v) {
    std::int64_t rem = v;
    auto& sym = tuple[0].symbols;
    for (int j = n - 1; j >= 0; --j) {
      sym[static_cast<std::size_t>(j)] = static_cast<int>(rem % a.size);
      rem /= a.size;
    }
    if (test.check(tuple)) out.push_back(tuple[0]);
  }
  return out;
}

}  // namespace embedcap
