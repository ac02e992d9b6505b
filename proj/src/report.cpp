#include "embedcap/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace embedcap {

std::string format_rate(double v) {
  // nearbyint under the default rounding mode resolves ties to even
  double scaled = std::nearbyint(v * 1e6);
  auto micro = static_cast<long long>(scaled);
  const bool neg = micro < 0;
  if (neg) micro = -micro;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%lld.%06lld", (neg && micro != 0) ? "-" : "",
                micro / 1000000, micro % 1000000);
  return buf;
}

std::string region_csv(const RateRegion& region) {
  std::ostringstream out;
  out << "kind,lambda,r1,r2\n";
  for (const auto& v : region.hull)
    out << "vertex,," << format_rate(v.r1) << ',' << format_rate(v.r2) << '\n';
  auto supports = region.supports;
  std::stable_sort(supports.begin(), supports.end(),
                   [](const SupportSample& a, const SupportSample& b) {
                     return a.lambda < b.lambda;
                   });
  for (const auto& s : supports)
    out << "support," << format_rate(s.lambda) << ',' << format_rate(s.argmax.r1) << ','
        << format_rate(s.argmax.r2) << '\n';
  return out.str();
}

const char* outcome_name(TrialOutcome o) {
  switch (o) {
    case TrialOutcome::ok: return "ok";
    case TrialOutcome::encode_host_atypical: return "encode_host_atypical";
    case TrialOutcome::encode_bin_exhausted: return "encode_bin_exhausted";
    case TrialOutcome::decode_none_typical: return "decode_none_typical";
    case TrialOutcome::decode_ambiguous: return "decode_ambiguous";
    case TrialOutcome::wrong_message: return "wrong_message";
    case TrialOutcome::wrong_host: return "wrong_host";
  }
  return "?";
}

std::string sim_report_text(const SimReport& report, const SimConfig& cfg) {
  std::ostringstream out;
  out << "n=" << cfg.n << '\n';
  out << "r1=" << format_rate(cfg.r1) << '\n';
  out << "r2=" << format_rate(cfg.r2) << '\n';
  out << "eps=" << format_rate(cfg.eps) << '\n';
  out << "eps1=" << format_rate(cfg.eps1) << '\n';
  out << "seed=" << cfg.seed << '\n';
  out << "trials_run=" << report.trials_run << '\n';
  out << "errors=" << report.errors << '\n';
  out << "empirical_error=" << format_rate(report.empirical_error) << '\n';
  for (int i = 1; i < kTrialOutcomeCount; ++i)
    out << "breakdown." << outcome_name(static_cast<TrialOutcome>(i)) << '='
        << report.breakdown[static_cast<std::size_t>(i)] << '\n';
  for (std::size_t i = 0; i < report.avg_distortion.size(); ++i)
    out << "avg_distortion." << (i + 1) << '=' << format_rate(report.avg_distortion[i])
        << '\n';
  out << "typical_distortion_bound_held=" << (report.typical_distortion_bound_held ? 1 : 0)
      << '\n';
  return out.str();
}

// --------------------------------------------------------------- verify

namespace {

constexpr double kVerifyTol = 1e-6;

// max over support angles of how far `inner` pokes outside `outer`,
// plus vertex-wise containment at the same tolerance
double containment_violation(const RateRegion& inner, const RateRegion& outer) {
  if (inner.empty) return 0.0;
  if (outer.empty) return 1.0;  // nonempty inside empty: hard violation
  double worst = 0.0;
  for (double l : {0.0, 0.25, 0.5, 0.75, 1.0})
    worst = std::max(worst, support_function(inner, l) - support_function(outer, l));
  for (const auto& v : inner.hull)
    if (!region_contains(outer, v, kVerifyTol)) {
      double best = 1.0;
      for (double l : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const double gap = (l * v.r1 + (1.0 - l) * v.r2) - support_function(outer, l);
        best = std::min(best, std::max(gap, 0.0));
      }
      worst = std::max(worst, std::max(best, kVerifyTol));
    }
  return std::max(worst, 0.0);
}

VerifyCheck containment_check(const std::string& name, const RateRegion& inner,
                              const RateRegion& outer) {
  VerifyCheck c;
  c.name = name;
  c.max_violation = containment_violation(inner, outer);
  c.passed = c.max_violation <= kVerifyTol;
  return c;
}

}  // namespace

std::vector<VerifyCheck> run_verification(const ProblemSpec& spec) {
  std::vector<VerifyCheck> checks;
  const SearchConfig& cfg = spec.search;

  if (spec.is_mac()) {
    const MacProblem& p = spec.mac();
    RateRegion inner = compute_region(p, cfg, BoundSide::inner);

    if (p.mac_case == MacCase::C) {
      RateRegion outer = compute_region(p, cfg, BoundSide::outer);
      checks.push_back(containment_check("inner_subset_outer", inner, outer));
    }
    if (p.mac_case == MacCase::B) {
      MacProblem pa = p;
      pa.mac_case = MacCase::A;
      RateRegion case_a = compute_region(pa, cfg, BoundSide::inner);
      checks.push_back(containment_check("caseB_subset_caseA", inner, case_a));
    }

    // distortion nesting: grow both budgets by a tenth of the range
    MacProblem wider = p;
    wider.delta1 = std::min(p.d1.d_max, p.delta1 + 0.1 * std::max(1.0, p.d1.d_max));
    wider.delta2 = std::min(p.d2.d_max, p.delta2 + 0.1 * std::max(1.0, p.d2.d_max));
    SearchConfig seeded = cfg;
    if (!inner.empty) seeded.seed_points = inner.hull;
    RateRegion wide_region = compute_region(wider, seeded, BoundSide::inner);
    checks.push_back(containment_check("delta_nesting", inner, wide_region));
  } else {
    const BcProblem& p = spec.bc();
    RateRegion inner = compute_region(p, cfg, BoundSide::inner);

    if (p.bc_case == BcCase::Ap || p.bc_case == BcCase::Bp) {
      RateRegion outer = compute_region(p, cfg, BoundSide::outer);
      checks.push_back(containment_check("inner_subset_outer", inner, outer));
    }
    if (p.bc_case == BcCase::Cp || p.bc_case == BcCase::Dp) {
      BcProblem pc = p, pd = p;
      pc.bc_case = BcCase::Cp;
      pd.bc_case = BcCase::Dp;
      const std::string csv_c = region_csv(compute_region(pc, cfg, BoundSide::inner));
      const std::string csv_d = region_csv(compute_region(pd, cfg, BoundSide::inner));
      VerifyCheck c;
      c.name = "caseC_equals_caseD";
      c.passed = csv_c == csv_d;
      c.max_violation = c.passed ? 0.0 : 1.0;
      checks.push_back(c);
    }

    BcProblem wider = p;
    wider.delta = std::min(p.d.d_max, p.delta + 0.1 * std::max(1.0, p.d.d_max));
    SearchConfig seeded = cfg;
    if (!inner.empty) seeded.seed_points = inner.hull;
    RateRegion wide_region = compute_region(wider, seeded, BoundSide::inner);
    checks.push_back(containment_check("delta_nesting", inner, wide_region));
  }
  return checks;
}

std::string verify_report_text(const std::vector<VerifyCheck>& checks) {
  std::ostringstream out;
  for (const auto& c : checks) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", c.max_violation);
    out << (c.passed ? "PASS" : "FAIL") << ' ' << c.name << " max_violation=" << buf
        << '\n';
  }
  return out.str();
}

}  // namespace embedcap
