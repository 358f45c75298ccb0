#include "lrmt/report.hpp"

#include "lrmt/errors.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace lrmt {

namespace {

using nlohmann::json;

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string report_json(const SolveReport& report, const SolverConfig& cfg,
                        const ProblemInfo& problem) {
  json j;
  j["problem"] = {{"name", problem.name},
                  {"n_a", problem.n_a},
                  {"n_b", problem.n_b},
                  {"p", problem.p},
                  {"q", problem.q}};
  j["config"] = {{"method", to_string(cfg.method)},
                 {"tol", cfg.tol},
                 {"maxit", cfg.maxit},
                 {"maxrank", cfg.truncation.maxrank},
                 {"toltrank", cfg.truncation.toltrank},
                 {"seed", cfg.sketch_seed},
                 {"preconditioner", describe(cfg.preconditioner)},
                 {"direct_threshold", cfg.inner.direct_threshold},
                 {"pcg_tol", cfg.inner.pcg_tol},
                 {"pcg_maxit", cfg.inner.pcg_maxit}};
  j["status"] = to_string(report.status);
  j["iterations"] = report.iterations;
  j["rhs_norm"] = report.rhs_norm;
  j["sketch"] = {{"mode", to_string(report.sketch.mode)}, {"s", report.sketch.s}};
  j["residual_estimates"] = report.residual_estimates;
  json ranks = json::array();
  for (const RankTriple& r : report.ranks) ranks.push_back({{"x", r.x}, {"r", r.r}, {"p", r.p}});
  j["ranks"] = ranks;
  j["final_rank"] = report.ranks.empty() ? 0 : report.ranks.back().x;
  j["inner_pcg_min"] = report.inner_pcg_min;
  j["inner_pcg_max"] = report.inner_pcg_max;
  j["true_final_residual"] =
      report.true_final_residual ? json(*report.true_final_residual) : json(nullptr);
  const PhaseTimes& t = report.wall_times;
  j["wall_times"] = {{"setup", t.setup},       {"preconditioner", t.preconditioner},
                     {"reduced", t.reduced},   {"update", t.update},
                     {"residual", t.residual}, {"total", t.total}};
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

void write_report_json(const std::filesystem::path& path, const SolveReport& report,
                       const SolverConfig& cfg, const ProblemInfo& problem) {
  write_text(path, report_json(report, cfg, problem));
}

std::string history_csv(const SolveReport& report) {
  std::ostringstream out;
  out << "k,residual_estimate,rank_x,rank_r,rank_p,pcg_min,pcg_max\n";
  for (std::size_t k = 0; k < report.residual_estimates.size(); ++k) {
    const RankTriple r = k < report.ranks.size() ? report.ranks[k] : RankTriple{};
    const int lo = k > 0 && k - 1 < report.inner_pcg_min.size() ? report.inner_pcg_min[k - 1] : 0;
    const int hi = k > 0 && k - 1 < report.inner_pcg_max.size() ? report.inner_pcg_max[k - 1] : 0;
    out << k << ',' << fmt(report.residual_estimates[k]) << ',' << r.x << ',' << r.r << ','
        << r.p << ',' << lo << ',' << hi << '\n';
  }
  return out.str();
}

void write_history_csv(const std::filesystem::path& path, const SolveReport& report) {
  write_text(path, history_csv(report));
}

}  // namespace lrmt
