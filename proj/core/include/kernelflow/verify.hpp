#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kernelflow {

/// Result of checking one proposition over randomized instances. `max_ratio`
/// is the worst observed value of (checked quantity / its bound), so any value
/// <= 1 + 1e-9 passes; `worst` describes the instance attaining it so a
/// failure can be replayed.
struct PropositionReport {
  int proposition = 0;
  int instances = 0;
  double max_ratio = 0.0;
  bool pass = false;
  std::string worst;
  std::string note;
};

PropositionReport verify_gap_bounds(int instances, std::uint64_t seed);       // Prop 1
PropositionReport verify_shrinkage(int instances, std::uint64_t seed);        // Prop 2
PropositionReport verify_risk_ratio(int instances, std::uint64_t seed);       // Prop 3
PropositionReport verify_diag_signflow(int instances, std::uint64_t seed);    // Prop 4
PropositionReport verify_feature_equivalence(int instances, std::uint64_t seed);  // Prop 5
PropositionReport verify_step_monotonicity(int instances, std::uint64_t seed);    // Prop 6
PropositionReport verify_diag_signflow_f(int instances, std::uint64_t seed);  // Prop 8

/// Run the checks listed in `propositions` (subset of {1,2,3,4,5,6,8}).
std::vector<PropositionReport> run_verification(const std::vector<int>& propositions,
                                                int instances, std::uint64_t seed);

}  // namespace kernelflow
