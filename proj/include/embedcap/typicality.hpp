#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "embedcap/prob.hpp"

namespace embedcap {

// Strong typicality over symbol sequences. Deviation tests use strict "<"
// and compare integer counts against scaled targets with a single floating
// multiply, so results are exact and platform-independent.

struct Sequence {
  Alphabet alphabet;
  std::vector<int> symbols;

  Sequence(Alphabet a, std::vector<int> syms);
  int n() const { return static_cast<int>(symbols.size()); }
};

struct TypicalityParams {
  double eps;
  double eps1;

  TypicalityParams(double e, double e1);  // enforces 0 < eps1 < eps
};

// Packs parallel sequences into one sequence over the product alphabet
// (row-major over the input alphabets).
Alphabet product_alphabet(std::span<const Alphabet> parts, const std::string& name);
Sequence pack_sequences(std::span<const Sequence> seqs, const Alphabet& packed);
std::vector<Sequence> unpack_sequence(const Sequence& packed,
                                      std::span<const Alphabet> parts);

// Joint occurrence counts over the product alphabet; all sequences must have
// equal length.
std::vector<std::int64_t> empirical_counts(std::span<const Sequence> seqs);

// Per-symbol deviation bound with denominator |alphabet|; symbols with
// p(a) = 0 must not occur.
bool is_strongly_typical(const Sequence& x, const Pmf& p, double eps);

// Per-cell deviation bound with denominator prod(|alphabet_i|); zero cells
// must have zero count.
bool is_jointly_typical(std::span<const Sequence> seqs, const JointPmf& joint,
                        double eps);

// Precomputed per-cell admissible count windows for one (joint, n, eps)
// triple; equivalent to is_jointly_typical but O(n + cells) per query.
class TypicalityTest {
 public:
  TypicalityTest(const JointPmf& joint, int n, double eps);

  bool check(std::span<const Sequence> seqs) const;
  bool check_counts(std::span<const std::int64_t> counts) const;
  int n() const { return n_; }
  const JointPmf& joint() const { return joint_; }

 private:
  JointPmf joint_;
  int n_;
  std::vector<std::int64_t> lo_, hi_;  // admissible N per cell, inclusive
};

// All sequences over the LAST axis of `joint` that are jointly typical with
// the given fixed sequences (one per leading axis, in axis order).
// Enumeration is exhaustive; |last|^n > n_limit is refused with BudgetError.
std::vector<Sequence> conditional_typical_candidates(const JointPmf& joint,
                                                     std::span<const Sequence> fixed,
                                                     double eps, std::int64_t n_limit);

// Exhaustive typical set of a single pmf at blocklength n.
std::vector<Sequence> typical_set(const Pmf& p, int n, double eps, std::int64_t n_limit);

}  // namespace embedcap
