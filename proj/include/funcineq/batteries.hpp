#pragma once

#include <functional>
#include <string>
#include <vector>

namespace funcineq {

/// Outcome of one acceptance criterion.
struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  std::vector<std::string> details;  ///< one line per measured quantity
};

using Criterion = std::function<CriterionResult()>;

CriterionResult criterion_convex_calculus();        // 1
CriterionResult criterion_transport_exactness();    // 2
CriterionResult criterion_gaussian_tightness();     // 3
CriterionResult criterion_exponential_line();       // 4
CriterionResult criterion_main_chain();             // 5
CriterionResult criterion_lb_reduction();           // 6
CriterionResult criterion_derivative_identity();    // 7
CriterionResult criterion_markov_conjugacy();       // 8
CriterionResult criterion_limits();                 // 9
CriterionResult criterion_discrete_diagnostics();   // 10

/// All ten criteria in order.
std::vector<Criterion> all_criteria();

/// Criteria bundled under a suite preset name; throws InputError for unknown names.
std::vector<Criterion> preset_criteria(const std::string& preset);
std::vector<std::string> preset_names();

/// Runs a criterion, timing it and folding the runtime budget into the verdict.
CriterionResult run_timed(const Criterion& c);

/// "[PASS] 3 gaussian tightness (0.41 s / 5 s)".
std::string summary_line(const CriterionResult& r);

}  // namespace funcineq
