#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "embedcap/prob.hpp"
#include "embedcap/regions.hpp"
#include "embedcap/rng.hpp"
#include "embedcap/typicality.hpp"

namespace embedcap {

// Executable instantiations of the random-coding achievability schemes:
// MAC case C (joint message/host typicality decoding), BC case B' (binned
// auxiliary pool with superposed refinement) and BC case C' (two-layer
// superposition). Codewords are regenerated lazily from (seed, role,
// context) keys, so codebooks are never materialized and every run is
// reproducible bit-for-bit, independent of thread count.

struct SimConfig {
  int n = 8;
  double r1 = 0.0;
  double r2 = 0.0;
  double eps = 0.1;
  double eps1 = 0.05;
  int trials = 100;
  std::uint64_t seed = 1;
  std::int64_t decode_budget = std::int64_t{1} << 20;
  int threads = 0;
};

std::int64_t message_count(int n, double rate);  // ceil(2^(n r)), >= 1

enum class TrialOutcome : int {
  ok = 0,
  encode_host_atypical,
  encode_bin_exhausted,
  decode_none_typical,
  decode_ambiguous,
  wrong_message,
  wrong_host,
};
inline constexpr int kTrialOutcomeCount = 7;

struct SimReport {
  long long trials_run = 0;
  long long errors = 0;
  double empirical_error = 0.0;
  std::array<long long, kTrialOutcomeCount> breakdown{};
  std::vector<double> avg_distortion;  // one entry per encoder
  // Holds when every trial whose (host, codeword) pair was jointly typical
  // met the per-letter bound d <= E d + eps * d_max.
  bool typical_distortion_bound_held = true;
};

enum class SimScheme { mac_case_c, bc_case_b, bc_case_c };

Sequence sample_iid(const Pmf& p, int n, KeyStream& rng);
Sequence sample_channel(const Kernel& k, std::span<const Sequence> inputs,
                        KeyStream& rng);

// ----------------------------------------------------------- MAC case C

class MacCodebook {
 public:
  // Tuple kernels are (s_i) -> (x_i); the time-sharing alphabet is fixed to
  // a singleton in this implementation (regions convexify by hull instead).
  MacCodebook(const MacProblem& p, const MacInnerTuple& t, const SimConfig& cfg);

  Sequence time_share(int n) const;  // constant q^n
  Sequence encode1(const Sequence& q, const Sequence& s1, std::int64_t m) const;
  Sequence encode2(const Sequence& q, const Sequence& s2, std::int64_t m) const;

  std::int64_t m1_count() const { return m1_; }
  std::int64_t m2_count() const { return m2_; }
  const MacProblem& problem() const { return *problem_; }
  const JointPmf& full_joint() const { return full_joint_; }  // (q,s1,s2,x1,x2,y)

 private:
  const MacProblem* problem_;
  Kernel enc1_, enc2_;
  std::uint64_t seed_;
  std::int64_t m1_, m2_;
  JointPmf full_joint_;
};

struct MacDecodeOutput {
  TrialOutcome outcome = TrialOutcome::decode_none_typical;
  std::int64_t m1 = -1, m2 = -1;
  std::vector<int> s1, s2;

  bool operator==(const MacDecodeOutput& o) const {
    if (outcome != o.outcome) return false;
    if (outcome != TrialOutcome::ok) return true;
    return m1 == o.m1 && m2 == o.m2 && s1 == o.s1 && s2 == o.s2;
  }
};

// Joint typicality decoding over all message pairs and all host-pair
// candidates in T_eps1; unique hit required. Outcome is ok,
// decode_none_typical, or decode_ambiguous.
MacDecodeOutput mac_caseC_decode(const MacCodebook& cb, const Sequence& q,
                                 const Sequence& y, const TypicalityParams& params,
                                 std::int64_t budget);

// ------------------------------------------------------------ BC case B'

class BcBinnedCodebook {
 public:
  BcBinnedCodebook(const BcProblem& p, const BcTuple& t, const SimConfig& cfg);

  Sequence pool_u(std::int64_t pool_idx, int n) const;  // iid p(u)
  Sequence codeword_x(const Sequence& s, std::int64_t pool_idx, std::int64_t m1) const;

  std::int64_t bin_size() const { return bin_size_; }
  std::int64_t pool_size() const { return m2_ * bin_size_; }
  std::int64_t m1_count() const { return m1_; }
  std::int64_t m2_count() const { return m2_; }
  const BcProblem& problem() const { return *problem_; }
  const JointPmf& full_joint() const { return full_joint_; }  // (s,u,x,y,z)
  const Pmf& u_marginal() const { return u_marginal_; }

 private:
  const BcProblem* problem_;
  std::uint64_t seed_;
  std::int64_t m1_, m2_, bin_size_;
  Pmf u_marginal_;
  Kernel x_given_us_;  // (u,s) -> (x)
  JointPmf full_joint_;
};

struct BcEncodeOutput {
  TrialOutcome outcome = TrialOutcome::ok;
  std::int64_t pool_idx = -1;
  std::optional<Sequence> u, x;
};

// Scans bin w2 in ascending pool order for the first u^n jointly typical
// with s^n, then superposes x^n(s^n, u^n, w1).
BcEncodeOutput bc_caseB_encode(const BcBinnedCodebook& cb, const Sequence& s,
                               std::int64_t w1, std::int64_t w2,
                               const TypicalityParams& params);

struct BcDecode1Output {
  TrialOutcome outcome = TrialOutcome::decode_none_typical;
  std::int64_t m1 = -1, m2 = -1;
  std::vector<int> s;

  bool operator==(const BcDecode1Output& o) const {
    if (outcome != o.outcome) return false;
    if (outcome != TrialOutcome::ok) return true;
    return m1 == o.m1 && m2 == o.m2 && s == o.s;
  }
};

struct BcDecode2Output {
  TrialOutcome outcome = TrialOutcome::decode_none_typical;
  std::int64_t m2 = -1;
  std::vector<int> s;  // only filled by schemes that recover the host at 2

  bool operator==(const BcDecode2Output& o) const {
    if (outcome != o.outcome) return false;
    if (outcome != TrialOutcome::ok) return true;
    return m2 == o.m2 && s == o.s;
  }
};

// Stage 1: unique pool sequence typical with y (bin gives m2). Stage 2:
// unique (m1, s^n) among conditional host candidates.
BcDecode1Output bc_caseB_decode1(const BcBinnedCodebook& cb, const Sequence& y,
                                 const TypicalityParams& params, std::int64_t budget);
// Unique pool sequence typical with z.
BcDecode2Output bc_caseB_decode2(const BcBinnedCodebook& cb, const Sequence& z,
                                 const TypicalityParams& params);

// ------------------------------------------------------------ BC case C'

class BcSuperpositionCodebook {
 public:
  BcSuperpositionCodebook(const BcProblem& p, const BcTuple& t, const SimConfig& cfg);

  Sequence codeword_u(const Sequence& s, std::int64_t m2) const;  // iid p(u|s)
  Sequence codeword_x(const Sequence& s, std::int64_t m1, std::int64_t m2) const;

  std::int64_t m1_count() const { return m1_; }
  std::int64_t m2_count() const { return m2_; }
  const BcProblem& problem() const { return *problem_; }
  const JointPmf& full_joint() const { return full_joint_; }  // (s,u,x,y,z)

 private:
  const BcProblem* problem_;
  std::uint64_t seed_;
  std::int64_t m1_, m2_;
  Kernel u_given_s_;   // (s) -> (u)
  Kernel x_given_us_;  // (u,s) -> (x)
  JointPmf full_joint_;
};

Sequence bc_caseC_encode(const BcSuperpositionCodebook& cb, const Sequence& s,
                         std::int64_t w1, std::int64_t w2);
BcDecode1Output bc_caseC_decode1(const BcSuperpositionCodebook& cb, const Sequence& y,
                                 const TypicalityParams& params, std::int64_t budget);
BcDecode2Output bc_caseC_decode2(const BcSuperpositionCodebook& cb, const Sequence& z,
                                 const TypicalityParams& params, std::int64_t budget);

// ----------------------------------------------------------------- driver

// Runs cfg.trials independent episodes (fresh hosts, messages and channel
// noise per trial; codebooks fixed by cfg.seed) and aggregates empirical
// error, per-event breakdown and per-encoder average distortion.
SimReport simulate(const MacProblem& p, SimScheme scheme, const MacInnerTuple& t,
                   const SimConfig& cfg);
SimReport simulate(const BcProblem& p, SimScheme scheme, const BcTuple& t,
                   const SimConfig& cfg);

}  // namespace embedcap
