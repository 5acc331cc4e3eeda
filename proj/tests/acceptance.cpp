// Acceptance battery: one line per criterion, details indented below it.
#include <cstdio>
#include <exception>

#include "funcineq/batteries.hpp"

int main() {
  int failed = 0;
  int id = 0;
  for (const auto& criterion : funcineq::all_criteria()) {
    ++id;
    funcineq::CriterionResult r;
    try {
      r = funcineq::run_timed(criterion);
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "threw";
      r.details.push_back(e.what());
    }
    std::printf("%s\n", funcineq::summary_line(r).c_str());
    for (const auto& line : r.details) std::printf("      %s\n", line.c_str());
    std::fflush(stdout);
    if (!r.passed) ++failed;
  }
  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
