#include "embedcap/prob.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

namespace embedcap {

std::int64_t max_table_cells() {
  static const std::int64_t cap = [] {
    if (const char* env = std::getenv("EMBEDCAP_MAX_CELLS")) {
      const long long v = std::atoll(env);
      if (v > 0) return static_cast<std::int64_t>(v);
    }
    return std::int64_t{10'000'000};
  }();
  return cap;
}

namespace {

void check_alphabet(const Alphabet& a) {
  if (a.size < 1) throw SpecError("alphabet '" + a.name + "' must have size >= 1");
}

std::int64_t checked_cells(std::span<const Alphabet> axes) {
  std::int64_t cells = 1;
  for (const auto& a : axes) {
    check_alphabet(a);
    if (cells > max_table_cells() / a.size)
      throw SpecError("table over " + std::to_string(axes.size()) +
                      " axes exceeds the dense-cell cap");
    cells *= a.size;
  }
  return cells;
}

void check_normalized(std::span<const double> probs, const std::string& what) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw SpecError(what + ": negative or NaN entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kNormTol)
    throw SpecError(what + ": entries sum to " + std::to_string(sum) +
                    ", expected 1 within 1e-9");
}

}  // namespace

// ---------------------------------------------------------------- Pmf

Pmf::Pmf(Alphabet alphabet, std::vector<double> probs)
    : alphabet_(std::move(alphabet)), probs_(std::move(probs)) {
  check_alphabet(alphabet_);
  if (static_cast<int>(probs_.size()) != alphabet_.size)
    throw SpecError("pmf over '" + alphabet_.name + "': wrong number of entries");
  check_normalized(probs_, "pmf over '" + alphabet_.name + "'");
}

// ---------------------------------------------------------------- JointPmf

JointPmf::JointPmf(std::vector<Alphabet> axes, std::vector<double> probs)
    : axes_(std::move(axes)), probs_(std::move(probs)) {
  if (axes_.empty()) throw SpecError("joint pmf needs at least one axis");
  const std::int64_t cells = checked_cells(axes_);
  if (static_cast<std::int64_t>(probs_.size()) != cells)
    throw SpecError("joint pmf table has " + std::to_string(probs_.size()) +
                    " cells, expected " + std::to_string(cells));
  for (std::size_t i = 0; i < axes_.size(); ++i)
    for (std::size_t j = i + 1; j < axes_.size(); ++j)
      if (axes_[i].name == axes_[j].name)
        throw SpecError("duplicate axis name '" + axes_[i].name + "'");
  check_normalized(probs_, "joint pmf");
  strides_.assign(axes_.size(), 1);
  for (int i = static_cast<int>(axes_.size()) - 2; i >= 0; --i)
    strides_[i] = strides_[i + 1] * axes_[i + 1].size;
}

JointPmf JointPmf::from_pmf(const Pmf& p) {
  return JointPmf({p.alphabet()},
                  std::vector<double>(p.probs().begin(), p.probs().end()));
}

int JointPmf::axis_index(std::string_view name) const {
  for (std::size_t i = 0; i < axes_.size(); ++i)
    if (axes_[i].name == name) return static_cast<int>(i);
  throw SpecError("unknown axis '" + std::string(name) + "'");
}

bool JointPmf::has_axis(std::string_view name) const {
  for (const auto& a : axes_)
    if (a.name == name) return true;
  return false;
}

std::int64_t JointPmf::flat_index(std::span<const int> idx) const {
  std::int64_t f = 0;
  for (std::size_t i = 0; i < axes_.size(); ++i) f += strides_[i] * idx[i];
  return f;
}

double JointPmf::at(std::span<const int> idx) const {
  return probs_[static_cast<std::size_t>(flat_index(idx))];
}

void JointPmf::unflatten(std::int64_t flat, std::span<int> idx) const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    idx[i] = static_cast<int>(flat / strides_[i]);
    flat %= strides_[i];
  }
}

Pmf JointPmf::as_pmf() const {
  if (rank() != 1) throw SpecError("as_pmf requires a rank-1 joint");
  return Pmf(axes_[0], probs_);
}

// ---------------------------------------------------------------- Kernel

Kernel::Kernel(std::vector<Alphabet> inputs, std::vector<Alphabet> outputs,
               std::vector<double> probs)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)), probs_(std::move(probs)) {
  if (outputs_.empty()) throw SpecError("kernel needs at least one output axis");
  rows_ = inputs_.empty() ? 1 : checked_cells(inputs_);
  row_cells_ = checked_cells(outputs_);
  if (rows_ > max_table_cells() / row_cells_) throw SpecError("kernel exceeds the dense-cell cap");
  if (static_cast<std::int64_t>(probs_.size()) != rows_ * row_cells_)
    throw SpecError("kernel table has " + std::to_string(probs_.size()) +
                    " cells, expected " + std::to_string(rows_ * row_cells_));
  for (std::int64_t r = 0; r < rows_; ++r)
    check_normalized(row(r), "kernel row " + std::to_string(r));
}

std::span<const double> Kernel::row(std::int64_t input_cell) const {
  return std::span<const double>(probs_.data() + input_cell * row_cells_,
                                 static_cast<std::size_t>(row_cells_));
}

Kernel Kernel::deterministic(std::vector<Alphabet> inputs, std::vector<Alphabet> outputs,
                             std::span<const std::int64_t> map) {
  std::int64_t rows = 1;
  for (const auto& a : inputs) rows *= a.size;
  std::int64_t cols = 1;
  for (const auto& a : outputs) cols *= a.size;
  std::vector<double> t(static_cast<std::size_t>(rows * cols), 0.0);
  for (std::int64_t r = 0; r < rows; ++r) t[static_cast<std::size_t>(r * cols + map[r])] = 1.0;
  return Kernel(std::move(inputs), std::move(outputs), std::move(t));
}

// ------------------------------------------------------- DistortionMeasure

DistortionMeasure::DistortionMeasure(Alphabet host, Alphabet embed, std::vector<double> t)
    : host_alphabet(std::move(host)), embed_alphabet(std::move(embed)), table(std::move(t)) {
  check_alphabet(host_alphabet);
  check_alphabet(embed_alphabet);
  const std::size_t want =
      static_cast<std::size_t>(host_alphabet.size) * embed_alphabet.size;
  if (table.size() != want)
    throw SpecError("distortion table has wrong shape for (" + host_alphabet.name +
                    ", " + embed_alphabet.name + ")");
  for (double v : table) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw SpecError("distortion entries must be finite and nonnegative");
    d_max = std::max(d_max, v);
  }
}

// ------------------------------------------------------------ measures

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

double entropy(const Pmf& p) { return entropy(p.probs()); }

namespace {

// Sums the full table into the marginal selected by `mask` (bit i == keep
// axis i), returning its entropy without materializing a JointPmf.
double masked_entropy(const JointPmf& joint, std::uint32_t mask) {
  const auto& axes = joint.axes();
  const int rank = joint.rank();
  std::int64_t out_cells = 1;
  for (int i = 0; i < rank; ++i)
    if (mask & (1u << i)) out_cells *= axes[i].size;

  std::vector<double> marg(static_cast<std::size_t>(out_cells), 0.0);
  std::vector<int> idx(rank, 0);
  const auto table = joint.table();
  for (std::int64_t f = 0; f < joint.cells(); ++f) {
    std::int64_t o = 0;
    for (int i = 0; i < rank; ++i)
      if (mask & (1u << i)) o = o * axes[i].size + idx[i];
    marg[static_cast<std::size_t>(o)] += table[static_cast<std::size_t>(f)];
    for (int i = rank - 1; i >= 0; --i) {
      if (++idx[i] < axes[i].size) break;
      idx[i] = 0;
    }
  }
  return entropy(marg);
}

std::uint32_t group_mask(const JointPmf& joint, std::span<const std::string> axes) {
  std::uint32_t mask = 0;
  for (const auto& name : axes) mask |= 1u << joint.axis_index(name);
  return mask;
}

}  // namespace

double group_entropy(const JointPmf& joint, std::span<const std::string> axes) {
  return masked_entropy(joint, group_mask(joint, axes));
}

double mutual_information(const JointPmf& joint, std::span<const std::string> a,
                          std::span<const std::string> b) {
  InfoCalc calc(joint);
  return calc.I(group_mask(joint, a), group_mask(joint, b));
}

double conditional_mutual_information(const JointPmf& joint,
                                      std::span<const std::string> a,
                                      std::span<const std::string> b,
                                      std::span<const std::string> c) {
  InfoCalc calc(joint);
  return calc.I(group_mask(joint, a), group_mask(joint, b), group_mask(joint, c));
}

JointPmf marginalize(const JointPmf& joint, std::span<const std::string> keep_axes) {
  const auto& axes = joint.axes();
  const int rank = joint.rank();
  std::uint32_t mask = group_mask(joint, keep_axes);

  // Kept axes stay in their original relative order.
  std::vector<Alphabet> out_axes;
  for (int i = 0; i < rank; ++i)
    if (mask & (1u << i)) out_axes.push_back(axes[i]);
  if (out_axes.empty()) throw SpecError("marginalize: must keep at least one axis");

  std::int64_t out_cells = 1;
  for (const auto& a : out_axes) out_cells *= a.size;
  std::vector<double> out(static_cast<std::size_t>(out_cells), 0.0);

  std::vector<int> idx(rank, 0);
  const auto table = joint.table();
  for (std::int64_t f = 0; f < joint.cells(); ++f) {
    std::int64_t o = 0;
    for (int i = 0; i < rank; ++i)
      if (mask & (1u << i)) o = o * axes[i].size + idx[i];
    out[static_cast<std::size_t>(o)] += table[static_cast<std::size_t>(f)];
    for (int i = rank - 1; i >= 0; --i) {
      if (++idx[i] < axes[i].size) break;
      idx[i] = 0;
    }
  }
  return JointPmf(std::move(out_axes), std::move(out));
}

JointPmf permute_axes(const JointPmf& joint, std::span<const std::string> order) {
  const int rank = joint.rank();
  if (static_cast<int>(order.size()) != rank)
    throw SpecError("permute_axes: order must name every axis exactly once");
  std::vector<int> src(order.size());
  std::vector<Alphabet> out_axes;
  std::uint32_t seen = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    src[i] = joint.axis_index(order[i]);
    if (seen & (1u << src[i])) throw SpecError("permute_axes: duplicate axis");
    seen |= 1u << src[i];
    out_axes.push_back(joint.axes()[static_cast<std::size_t>(src[i])]);
  }
  std::vector<double> out(static_cast<std::size_t>(joint.cells()));
  std::vector<int> idx(static_cast<std::size_t>(rank), 0);
  std::vector<int> pidx(static_cast<std::size_t>(rank), 0);
  std::int64_t f = 0;
  const auto table = joint.table();
  for (;;) {
    std::int64_t o = 0;
    for (int i = 0; i < rank; ++i) {
      pidx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(src[static_cast<std::size_t>(i)])];
      o = o * out_axes[static_cast<std::size_t>(i)].size + pidx[static_cast<std::size_t>(i)];
    }
    out[static_cast<std::size_t>(o)] = table[static_cast<std::size_t>(f)];
    int i = rank - 1;
    for (; i >= 0; --i) {
      if (++idx[static_cast<std::size_t>(i)] < joint.axes()[static_cast<std::size_t>(i)].size) break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
    if (i < 0) break;
    ++f;
  }
  return JointPmf(std::move(out_axes), std::move(out));
}

JointPmf chain(const JointPmf& joint, const Kernel& kernel) {
  const auto& jaxes = joint.axes();
  const int jrank = joint.rank();

  std::vector<int> in_pos;  // position of each kernel input axis in the joint
  in_pos.reserve(kernel.inputs().size());
  for (const auto& in : kernel.inputs()) {
    int pos = joint.axis_index(in.name);
    if (!(jaxes[pos] == in))
      throw SpecError("chain: axis '" + in.name + "' size mismatch");
    in_pos.push_back(pos);
  }
  for (const auto& out : kernel.outputs())
    if (joint.has_axis(out.name))
      throw SpecError("chain: output axis '" + out.name + "' already present");

  std::vector<Alphabet> out_axes = jaxes;
  for (const auto& out : kernel.outputs()) out_axes.push_back(out);

  const std::int64_t row_cells = kernel.row_cells();
  if (joint.cells() > max_table_cells() / row_cells)
    throw SpecError("chain result exceeds the dense-cell cap");
  std::vector<double> out(static_cast<std::size_t>(joint.cells() * row_cells));

  std::vector<int> idx(jrank, 0);
  const auto table = joint.table();
  for (std::int64_t f = 0; f < joint.cells(); ++f) {
    std::int64_t in_cell = 0;
    for (std::size_t k = 0; k < in_pos.size(); ++k)
      in_cell = in_cell * kernel.inputs()[k].size + idx[in_pos[k]];
    const double pj = table[static_cast<std::size_t>(f)];
    auto row = kernel.row(in_cell);
    double* dst = out.data() + f * row_cells;
    for (std::int64_t c = 0; c < row_cells; ++c) dst[c] = pj * row[c];
    for (int i = jrank - 1; i >= 0; --i) {
      if (++idx[i] < jaxes[i].size) break;
      idx[i] = 0;
    }
  }
  return JointPmf(std::move(out_axes), std::move(out));
}

double expected_distortion(const JointPmf& joint, const DistortionMeasure& d) {
  const int s_pos = joint.axis_index(d.host_alphabet.name);
  const int x_pos = joint.axis_index(d.embed_alphabet.name);
  if (!(joint.axes()[s_pos] == d.host_alphabet) ||
      !(joint.axes()[x_pos] == d.embed_alphabet))
    throw SpecError("expected_distortion: alphabet mismatch");

  std::vector<int> idx(joint.rank(), 0);
  const auto table = joint.table();
  double acc = 0.0;
  for (std::int64_t f = 0; f < joint.cells(); ++f) {
    acc += table[static_cast<std::size_t>(f)] * d.at(idx[s_pos], idx[x_pos]);
    for (int i = joint.rank() - 1; i >= 0; --i) {
      if (++idx[i] < joint.axes()[i].size) break;
      idx[i] = 0;
    }
  }
  return acc;
}

// ------------------------------------------------------------ InfoCalc

InfoCalc::InfoCalc(const JointPmf& joint) : joint_(joint) {
  if (joint.rank() > 20) throw SpecError("InfoCalc supports at most 20 axes");
  memo_.assign(std::size_t{1} << joint.rank(), 0.0);
  have_.assign(std::size_t{1} << joint.rank(), 0);
}

std::uint32_t InfoCalc::mask_of(std::span<const std::string> axes) const {
  std::uint32_t mask = 0;
  for (const auto& name : axes) mask |= 1u << joint_.axis_index(name);
  return mask;
}

double InfoCalc::H(std::uint32_t mask) {
  if (mask == 0) return 0.0;
  if (!have_[mask]) {
    memo_[mask] = masked_entropy(joint_, mask);
    have_[mask] = 1;
  }
  return memo_[mask];
}

double InfoCalc::I(std::uint32_t a, std::uint32_t b) {
  double v = H(a) + H(b) - H(a | b);
  return v < 0.0 ? 0.0 : v;
}

double InfoCalc::I(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
  double v = H(a | c) + H(b | c) - H(a | b | c) - H(c);
  return v < 0.0 ? 0.0 : v;
}

}  // namespace embedcap
