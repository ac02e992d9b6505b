#pragma once

#include <string>
#include <vector>

#include "embedcap/regions.hpp"
#include "embedcap/sim.hpp"
#include "embedcap/specfile.hpp"

namespace embedcap {

inline constexpr const char* kToolVersion = "embedcap 0.1.0";

// Fixed 6-decimal formatting, round half to even; byte-stable across
// platforms.
std::string format_rate(double v);

// CSV block with columns exactly kind,lambda,r1,r2. Vertex rows (empty
// lambda) come first, counterclockwise from the lexicographic minimum;
// support rows follow, sorted by lambda, carrying the maximizing vertex.
std::string region_csv(const RateRegion& region);

// Deterministic key=value block for a simulation result.
std::string sim_report_text(const SimReport& report, const SimConfig& cfg);

const char* outcome_name(TrialOutcome o);

// Structural verification driven by the problem case.
struct VerifyCheck {
  std::string name;
  bool passed = false;
  double max_violation = 0.0;
};

std::vector<VerifyCheck> run_verification(const ProblemSpec& spec);

std::string verify_report_text(const std::vector<VerifyCheck>& checks);

}  // namespace embedcap
