#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "embedcap/errors.hpp"

namespace embedcap {

// Exact finite-alphabet probability tables and the information measures
// built on them. Tables are dense, row-major, and immutable after
// construction; all operations are pure functions, so values can be shared
// freely across worker threads.

inline constexpr double kNormTol = 1e-9;  // |sum - 1| allowed at construction

// Dense-table guard: product of axis sizes per table. Defaults to 1e7
// cells; override with the EMBEDCAP_MAX_CELLS environment variable.
std::int64_t max_table_cells();

struct Alphabet {
  std::string name;
  int size = 0;

  bool operator==(const Alphabet& o) const { return name == o.name && size == o.size; }
};

class Pmf {
 public:
  Pmf(Alphabet alphabet, std::vector<double> probs);

  const Alphabet& alphabet() const { return alphabet_; }
  int size() const { return alphabet_.size; }
  double operator[](int i) const { return probs_[static_cast<std::size_t>(i)]; }
  std::span<const double> probs() const { return probs_; }

 private:
  Alphabet alphabet_;
  std::vector<double> probs_;
};

// Dense joint distribution over an ordered list of named axes.
class JointPmf {
 public:
  JointPmf(std::vector<Alphabet> axes, std::vector<double> probs);

  static JointPmf from_pmf(const Pmf& p);

  int rank() const { return static_cast<int>(axes_.size()); }
  const std::vector<Alphabet>& axes() const { return axes_; }
  std::int64_t cells() const { return static_cast<std::int64_t>(probs_.size()); }
  std::span<const double> table() const { return probs_; }

  int axis_index(std::string_view name) const;  // throws SpecError if absent
  bool has_axis(std::string_view name) const;

  double at(std::span<const int> idx) const;
  std::int64_t flat_index(std::span<const int> idx) const;
  void unflatten(std::int64_t flat, std::span<int> idx) const;

  Pmf as_pmf() const;  // rank-1 only

 private:
  std::vector<Alphabet> axes_;
  std::vector<std::int64_t> strides_;
  std::vector<double> probs_;
};

// Conditional table p(outputs | inputs). Stored row-major over
// (inputs..., outputs...); every input row is a valid pmf over the outputs.
class Kernel {
 public:
  Kernel(std::vector<Alphabet> inputs, std::vector<Alphabet> outputs,
         std::vector<double> probs);

  const std::vector<Alphabet>& inputs() const { return inputs_; }
  const std::vector<Alphabet>& outputs() const { return outputs_; }
  std::int64_t rows() const { return rows_; }
  std::int64_t row_cells() const { return row_cells_; }
  std::span<const double> row(std::int64_t input_cell) const;
  std::span<const double> table() const { return probs_; }

  // Deterministic map as a kernel: out = map[in_cell] over packed outputs.
  static Kernel deterministic(std::vector<Alphabet> inputs, std::vector<Alphabet> outputs,
                              std::span<const std::int64_t> map);

 private:
  std::vector<Alphabet> inputs_;
  std::vector<Alphabet> outputs_;
  std::int64_t rows_ = 0;
  std::int64_t row_cells_ = 0;
  std::vector<double> probs_;
};

struct DistortionMeasure {
  Alphabet host_alphabet;
  Alphabet embed_alphabet;
  std::vector<double> table;  // row-major host x embed, nonnegative
  double d_max = 0.0;

  DistortionMeasure(Alphabet host, Alphabet embed, std::vector<double> t);
  double at(int s, int x) const {
    return table[static_cast<std::size_t>(s) * embed_alphabet.size + x];
  }
};

// -------------------------------------------------------------------------
// Information measures (bits, log base 2; 0 log 0 == 0)
// -------------------------------------------------------------------------

double entropy(const Pmf& p);
double entropy(std::span<const double> probs);

// Entropy of the marginal over the named axis group.
double group_entropy(const JointPmf& joint, std::span<const std::string> axes);

// I(A;B) from joint entropies; clamped to >= 0.
double mutual_information(const JointPmf& joint, std::span<const std::string> a,
                          std::span<const std::string> b);

// I(A;B|C) = H(AC) + H(BC) - H(ABC) - H(C); clamped to >= 0.
double conditional_mutual_information(const JointPmf& joint,
                                      std::span<const std::string> a,
                                      std::span<const std::string> b,
                                      std::span<const std::string> c);

JointPmf marginalize(const JointPmf& joint, std::span<const std::string> keep_axes);

// Same distribution with axes rearranged into the given order (a
// permutation of all axis names).
JointPmf permute_axes(const JointPmf& joint, std::span<const std::string> order);

// Extends the joint by the kernel's output axes: p'(j, o) = p(j) k(o | inputs(j)).
// Kernel input axes are matched against joint axes by name and size.
JointPmf chain(const JointPmf& joint, const Kernel& kernel);

// E d(S, X) where the axes are located in the joint by the measure's
// alphabet names.
double expected_distortion(const JointPmf& joint, const DistortionMeasure& d);

// Memoizing wrapper for repeated group-entropy queries against one joint.
// Axis groups are addressed by bitmask over the joint's axis order.
class InfoCalc {
 public:
  explicit InfoCalc(const JointPmf& joint);

  std::uint32_t mask_of(std::span<const std::string> axes) const;
  double H(std::uint32_t mask);
  double I(std::uint32_t a, std::uint32_t b);                    // clamped >= 0
  double I(std::uint32_t a, std::uint32_t b, std::uint32_t c);   // I(a;b|c), clamped

 private:
  const JointPmf& joint_;
  std::vector<double> memo_;
  std::vector<char> have_;
};

}  // namespace embedcap
