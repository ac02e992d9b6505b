#pragma once

#include <optional>
#include <string>
#include <variant>

#include "embedcap/regions.hpp"
#include "embedcap/sim.hpp"

namespace embedcap {

// Problem-spec files: a human-readable section/key-value format with flat
// numeric tables and explicitly declared axis orders. Parsing is strict:
// unknown sections or keys, malformed tables, and normalization failures
// are rejected with line-bearing diagnostics.

struct ProblemSpec {
  std::variant<std::monostate, MacProblem, BcProblem> problem;
  BoundSide side = BoundSide::inner;
  SearchConfig search;
  SimConfig sim;
  std::optional<MacInnerTuple> mac_tuple;
  std::optional<BcTuple> bc_tuple;

  bool is_mac() const { return std::holds_alternative<MacProblem>(problem); }
  const MacProblem& mac() const { return std::get<MacProblem>(problem); }
  const BcProblem& bc() const { return std::get<BcProblem>(problem); }
};

ProblemSpec parse_spec(const std::string& text);
ProblemSpec parse_spec_file(const std::string& path);

// Canonical serialization; parse(serialize(s)) reproduces s and serializes
// to the same bytes.
std::string serialize_spec(const ProblemSpec& spec);

const char* case_tag(const ProblemSpec& spec);

}  // namespace embedcap
