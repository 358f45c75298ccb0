#pragma once

#include "lrmt/solver.hpp"

#include <filesystem>
#include <string>

namespace lrmt {

/// Free-form description of the solved problem carried into the report.
struct ProblemInfo {
  std::string name;
  Index n_a = 0;
  Index n_b = 0;
  Index p = 0;
  Index q = 0;
};

std::string report_json(const SolveReport& report, const SolverConfig& cfg,
                        const ProblemInfo& problem);
void write_report_json(const std::filesystem::path& path, const SolveReport& report,
                       const SolverConfig& cfg, const ProblemInfo& problem);

/// One row per recorded iterate: k, estimate, ranks of X/R/P and inner PCG counts.
std::string history_csv(const SolveReport& report);
void write_history_csv(const std::filesystem::path& path, const SolveReport& report);

}  // namespace lrmt
