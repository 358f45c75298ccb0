#include "cli.hpp"

#include "lrmt/convdiff.hpp"
#include "lrmt/errors.hpp"
#include "lrmt/manifest.hpp"
#include "lrmt/matrix_market.hpp"
#include "lrmt/report.hpp"
#include "lrmt/solver.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace lrmt::cli {

namespace {

namespace fs = std::filesystem;

struct ProblemOptions {
  std::string problem = "convdiff";
  Index n = 1024;
  double eps = 0.1;
  double wind_scale = 1.0;
  std::string manifest;
};

struct SolveOptions {
  ProblemOptions problem;
  std::string method = "ss-gcr1";
  double tol = 1e-6;
  int maxit = 100;
  Index maxrank = 50;
  double toltrank = 1e-10;
  std::string precond = "auto";
  std::string precond_terms;
  int adi_iters = 8;
  std::string shifts = "auto";
  std::string inner_precond = "auto";
  Index direct_threshold = 4000;
  double pcg_tol = 1e-4;
  int pcg_maxit = 200;
  std::uint64_t seed = 42;
  bool no_sketch = false;
  bool no_true_residual = false;
  std::string report = "report.json";
  std::string history = "history.csv";
  std::string save_solution;
  bool quiet = false;
};

struct BenchOptions {
  bool quick = false;
  int parallel = 1;
  std::vector<Index> ns;
  std::vector<double> eps;
  std::vector<std::string> methods{"ss-gcr1", "ss-mr"};
  int maxit = 100;
  int adi_iters = 8;
  std::uint64_t seed = 42;
  std::string out = "bench.csv";
};

struct VerifyOptions {
  ProblemOptions problem;
  std::string solution;
  double tol = 1e-6;
};

struct Problem {
  std::string name;
  std::optional<MultitermEquation> eq;
  ManifestHints hints;
  bool convdiff = false;
  std::vector<std::string> warnings;
};

std::array<Index, 2> parse_pair(const std::string& text, const std::string& flag) {
  std::array<Index, 2> out{};
  char comma = 0;
  long long a = 0, b = 0;
  std::istringstream in(text);
  if (!(in >> a >> comma >> b) || comma != ',' || a < 1 || b < 1 || !(in >> std::ws).eof()) {
    throw ConfigError(flag + " expects two 1-based indices like 1,2; got '" + text + "'");
  }
  out[0] = static_cast<Index>(a - 1);
  out[1] = static_cast<Index>(b - 1);
  return out;
}

ShiftSource parse_shifts(const std::string& text) {
  if (text == "auto") return ShiftSource::automatic;
  if (text == "analytic") return ShiftSource::analytic_laplacian;
  if (text == "estimated") return ShiftSource::estimated;
  throw ConfigError("unknown shift source '" + text + "' (auto, analytic, estimated)");
}

Problem load_problem(const ProblemOptions& opts) {
  Problem out;
  if (opts.problem == "convdiff") {
    if (!opts.manifest.empty()) throw ConfigError("--manifest requires --problem manifest");
    ConvDiffSpec spec{opts.n, opts.eps, opts.wind_scale};
    out.eq.emplace(build_convdiff(spec));
    out.convdiff = true;
    std::ostringstream name;
    name << "convdiff(n=" << opts.n << ",eps=" << opts.eps;
    if (opts.wind_scale != 1.0) name << ",wind=" << opts.wind_scale;
    name << ")";
    out.name = name.str();
  } else if (opts.problem == "manifest") {
    if (opts.manifest.empty()) throw ConfigError("--problem manifest needs --manifest PATH");
    const EquationManifest m = read_manifest(opts.manifest);
    out.eq.emplace(load_equation(m, &out.warnings));
    out.hints = m.hints;
    out.name = opts.manifest;
  } else {
    throw ConfigError("unknown problem '" + opts.problem + "' (convdiff, manifest)");
  }
  return out;
}

void add_problem_flags(CLI::App* app, ProblemOptions& p) {
  app->add_option("--problem", p.problem, "convdiff or manifest")->capture_default_str();
  app->add_option("--n", p.n, "grid points per dimension (convdiff)")->capture_default_str();
  app->add_option("--eps", p.eps, "diffusion coefficient (convdiff)")->capture_default_str();
  app->add_option("--wind-scale", p.wind_scale, "convection scaling (convdiff)")
      ->capture_default_str();
  app->add_option("--manifest", p.manifest, "equation manifest JSON");
}

SolverConfig make_config(const SolveOptions& o, const Problem& problem) {
  SolverConfig cfg;
  cfg.method = parse_method(o.method);
  cfg.tol = o.tol;
  cfg.maxit = o.maxit;
  cfg.truncation.maxrank = o.maxrank;
  cfg.truncation.toltrank = o.toltrank;
  cfg.inner.direct_threshold = o.direct_threshold;
  cfg.inner.pcg_tol = o.pcg_tol;
  cfg.inner.pcg_maxit = o.pcg_maxit;
  cfg.sketch_seed = o.seed;
  cfg.sketching = !o.no_sketch;
  cfg.compute_true_residual = !o.no_true_residual;

  const ManifestHints& h = problem.hints;
  std::string kind = o.precond;
  if (kind == "auto") {
    kind = problem.convdiff ? "two-term-adi" : h.preconditioner.value_or("none");
  }
  std::optional<std::array<Index, 2>> terms;
  if (!o.precond_terms.empty()) {
    terms = parse_pair(o.precond_terms, "--precond-terms");
  } else if (h.terms) {
    terms = h.terms;
  }
  if (kind == "none") {
    cfg.preconditioner = NoPreconditioner{};
  } else if (kind == "one-term") {
    cfg.preconditioner = OneTermSpec{terms ? (*terms)[0] : 0};
  } else if (kind == "two-term-adi") {
    TwoTermAdiSpec adi;
    if (terms) adi.terms = *terms;
    const bool adi_default = o.adi_iters == 8 && h.t_adi;
    adi.t_adi = adi_default ? *h.t_adi : o.adi_iters;
    const std::string shifts = o.shifts == "auto" && h.shifts ? *h.shifts : o.shifts;
    adi.shift_source = parse_shifts(shifts);
    cfg.preconditioner = adi;
  } else {
    throw ConfigError("unknown preconditioner '" + kind + "' (none, one-term, two-term-adi)");
  }

  if (o.inner_precond == "auto") {
    if (problem.convdiff) {
      cfg.inner.inner_precond_terms = std::array<Index, 2>{0, 1};
    } else {
      cfg.inner.inner_precond_terms = h.inner_precond_terms;
    }
  } else if (o.inner_precond != "none") {
    cfg.inner.inner_precond_terms = parse_pair(o.inner_precond, "--inner-precond");
  }
  return cfg;
}

void save_solution(const fs::path& dir, const LowRankMatrix& x) {
  fs::create_directories(dir);
  write_dense(dir / "left.mtx", x.left());
  write_dense(dir / "core.mtx", x.core());
  write_dense(dir / "right.mtx", x.right());
}

LowRankMatrix load_solution(const fs::path& dir) {
  return LowRankMatrix(read_dense(dir / "left.mtx"), read_dense(dir / "core.mtx"),
                       read_dense(dir / "right.mtx"));
}

std::string sci(double v, int digits = 2) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(digits) << v;
  return s.str();
}

int do_solve(const SolveOptions& o, std::ostream& out, std::ostream& err) {
  const Problem problem = load_problem(o.problem);
  for (const auto& w : problem.warnings) err << "warning: " << w << '\n';
  const MultitermEquation& eq = *problem.eq;
  const SolverConfig cfg = make_config(o, problem);

  const IterationObserver observer = [&](const IterationSnapshot& s) {
    if (!o.quiet) {
      out << "  k=" << s.k + 1 << "  est=" << sci(s.estimate) << "  rank(X)=" << s.x.rank()
          << "  rank(R)=" << s.residual.rank() << '\n';
    }
  };
  const SolveResult res = solve(eq, cfg, std::nullopt, observer);
  const SolveReport& rep = res.report;
  for (const auto& w : rep.warnings) err << "warning: " << w << '\n';

  const ProblemInfo info{problem.name, eq.n_a(), eq.n_b(), eq.p(), eq.q()};
  if (!o.report.empty()) write_report_json(o.report, rep, cfg, info);
  if (!o.history.empty()) write_history_csv(o.history, rep);
  if (!o.save_solution.empty()) save_solution(o.save_solution, res.x);

  out << problem.name << ' ' << to_string(cfg.method) << ": " << to_string(rep.status)
      << "  k=" << rep.iterations << "  rank=" << res.x.rank()
      << "  est=" << sci(rep.residual_estimates.back());
  if (rep.true_final_residual) out << "  res=" << sci(*rep.true_final_residual);
  out << "  sketch=" << to_string(rep.sketch.mode) << "  time=" << std::fixed
      << std::setprecision(2) << rep.wall_times.total << "s\n";
  out.unsetf(std::ios::floatfield);
  return rep.status == SolveStatus::converged ? kExitOk : kExitNotConverged;
}

struct BenchRow {
  Index n = 0;
  double eps = 0.0;
  std::string method;
  int k = 0;
  Index rank = 0;
  int pcg_min = 0;
  int pcg_max = 0;
  double res = 0.0;
  double time = 0.0;
  bool converged = false;
  std::string error;
};

BenchRow bench_one(Index n, double eps, const std::string& method, const BenchOptions& b) {
  BenchRow row;
  row.n = n;
  row.eps = eps;
  row.method = method;
  try {
    SolveOptions o;
    o.problem.n = n;
    o.problem.eps = eps;
    o.method = method;
    o.maxrank = eps >= 0.05 ? 50 : 70;
    o.maxit = b.maxit;
    o.adi_iters = b.adi_iters;
    o.seed = b.seed;
    Problem problem;
    problem.eq.emplace(build_convdiff(ConvDiffSpec{n, eps, 1.0}));
    problem.convdiff = true;
    const SolverConfig cfg = make_config(o, problem);
    const SolveResult res = solve(*problem.eq, cfg);
    const SolveReport& rep = res.report;
    row.k = rep.iterations;
    row.rank = res.x.rank();
    if (!rep.inner_pcg_min.empty()) {
      row.pcg_min = *std::min_element(rep.inner_pcg_min.begin(), rep.inner_pcg_min.end());
      row.pcg_max = *std::max_element(rep.inner_pcg_max.begin(), rep.inner_pcg_max.end());
    }
    row.res = rep.true_final_residual.value_or(rep.residual_estimates.back());
    row.time = rep.wall_times.total;
    row.converged = rep.status == SolveStatus::converged;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

int do_bench(const BenchOptions& b, std::ostream& out, std::ostream& err) {
  std::vector<Index> ns = b.ns;
  if (ns.empty()) {
    ns = b.quick ? std::vector<Index>{1024, 2048}
                 : std::vector<Index>{1024, 2048, 4096, 8192, 16384};
  }
  const std::vector<double> eps = b.eps.empty() ? std::vector<double>{0.1, 0.01} : b.eps;
  if (b.parallel < 1) throw ConfigError("--parallel must be >= 1");
  for (const auto& m : b.methods) parse_method(m);

  struct Job {
    Index n;
    double eps;
    std::string method;
  };
  std::vector<Job> jobs;
  for (double e : eps) {
    for (Index n : ns) {
      for (const auto& m : b.methods) jobs.push_back({n, e, m});
    }
  }
  std::vector<BenchRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      rows[i] = bench_one(jobs[i].n, jobs[i].eps, jobs[i].method, b);
      std::lock_guard<std::mutex> lock(log_mutex);
      err << "done n=" << jobs[i].n << " eps=" << jobs[i].eps << ' ' << jobs[i].method << '\n';
    }
  };
  const int threads = std::min<int>(b.parallel, static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "n,eps,method,k,rank,pcg_min,pcg_max,res,time_s,status\n";
  out << std::left << std::setw(7) << "n" << std::setw(7) << "eps" << std::setw(9) << "method"
      << std::right << std::setw(4) << "k" << std::setw(6) << "rank" << std::setw(10) << "pcg"
      << std::setw(11) << "Res" << std::setw(10) << "Time(s)" << '\n';
  bool all_ok = true;
  for (const BenchRow& r : rows) {
    const std::string status = !r.error.empty() ? "error" : (r.converged ? "converged" : "maxit");
    all_ok = all_ok && r.converged;
    csv << r.n << ',' << r.eps << ',' << r.method << ',' << r.k << ',' << r.rank << ','
        << r.pcg_min << ',' << r.pcg_max << ',' << sci(r.res, 3) << ',' << std::fixed
        << std::setprecision(3) << r.time << ',' << status << '\n';
    csv.unsetf(std::ios::floatfield);
    std::ostringstream eps_text;
    eps_text << r.eps;
    out << std::left << std::setw(7) << r.n << std::setw(7) << eps_text.str() << std::setw(9)
        << r.method << std::right << std::setw(4) << r.k << std::setw(6) << r.rank
        << std::setw(10) << (std::to_string(r.pcg_min) + "/" + std::to_string(r.pcg_max))
        << std::setw(11) << sci(r.res) << std::setw(10) << std::fixed << std::setprecision(2)
        << r.time << (status == "converged" ? "" : "  " + status) << '\n';
    out.unsetf(std::ios::floatfield);
    if (!r.error.empty()) err << "error n=" << r.n << " eps=" << r.eps << ": " << r.error << '\n';
  }
  if (!b.out.empty()) {
    std::ofstream f(b.out);
    if (!f) throw Error("cannot write " + b.out);
    f << csv.str();
  }
  return all_ok ? kExitOk : kExitNotConverged;
}

int do_verify(const VerifyOptions& v, std::ostream& out, std::ostream& err) {
  const Problem problem = load_problem(v.problem);
  for (const auto& w : problem.warnings) err << "warning: " << w << '\n';
  const LowRankMatrix x = load_solution(v.solution);
  const double res = true_residual(*problem.eq, x);
  out << problem.name << ": rank=" << x.rank() << "  res=" << sci(res, 6) << '\n';
  return res <= v.tol ? kExitOk : kExitNotConverged;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Low-rank solver for multiterm linear matrix equations", "lrmt"};
  app.require_subcommand(1);

  SolveOptions so;
  bool seed_given = false;
  CLI::App* solve_cmd = app.add_subcommand("solve", "run one solve and write report/history");
  add_problem_flags(solve_cmd, so.problem);
  solve_cmd->add_option("--method", so.method, "ss-gcr1 or ss-mr")->capture_default_str();
  solve_cmd->add_option("--tol", so.tol, "relative residual tolerance")->capture_default_str();
  solve_cmd->add_option("--maxit", so.maxit, "maximum iterations")->capture_default_str();
  solve_cmd->add_option("--maxrank", so.maxrank, "rank cap for truncation")
      ->capture_default_str();
  solve_cmd->add_option("--toltrank", so.toltrank, "relative singular value cutoff")
      ->capture_default_str();
  solve_cmd->add_option("--precond", so.precond, "auto, none, one-term or two-term-adi")
      ->capture_default_str();
  solve_cmd->add_option("--precond-terms", so.precond_terms, "1-based terms, e.g. 1,2");
  solve_cmd->add_option("--adi-iters", so.adi_iters, "ADI sweeps per application")
      ->capture_default_str();
  solve_cmd->add_option("--shifts", so.shifts, "auto, analytic or estimated")
      ->capture_default_str();
  solve_cmd->add_option("--inner-precond", so.inner_precond, "auto, none or i,j")
      ->capture_default_str();
  solve_cmd->add_option("--direct-threshold", so.direct_threshold,
                        "assemble the reduced system below this many unknowns")
      ->capture_default_str();
  solve_cmd->add_option("--pcg-tol", so.pcg_tol, "inner PCG tolerance")->capture_default_str();
  solve_cmd->add_option("--pcg-maxit", so.pcg_maxit, "inner PCG iteration cap")
      ->capture_default_str();
  solve_cmd->add_option("--seed", so.seed, "sketch seed (default 42, or $LRMT_SEED)")
      ->each([&](const std::string&) { seed_given = true; });
  solve_cmd->add_flag("--no-sketch", so.no_sketch, "truncate residuals exactly");
  solve_cmd->add_flag("--no-true-residual", so.no_true_residual,
                      "skip the final exact residual");
  solve_cmd->add_option("--report", so.report, "report JSON path ('' to skip)")
      ->capture_default_str();
  solve_cmd->add_option("--history", so.history, "history CSV path ('' to skip)")
      ->capture_default_str();
  solve_cmd->add_option("--save-solution", so.save_solution, "directory for X factors");
  solve_cmd->add_flag("--quiet,-q", so.quiet, "no per-iteration output");

  BenchOptions bo;
  bool bench_seed_given = false;
  CLI::App* bench_cmd = app.add_subcommand("bench", "convection-diffusion sweep");
  bench_cmd->add_flag("--quick", bo.quick, "only n <= 2048");
  bench_cmd->add_option("--parallel", bo.parallel, "concurrent solves")->capture_default_str();
  bench_cmd->add_option("--n", bo.ns, "override grid sizes");
  bench_cmd->add_option("--eps", bo.eps, "override diffusion coefficients");
  bench_cmd->add_option("--methods", bo.methods, "methods to run")->capture_default_str();
  bench_cmd->add_option("--maxit", bo.maxit, "maximum iterations")->capture_default_str();
  bench_cmd->add_option("--adi-iters", bo.adi_iters, "ADI sweeps")->capture_default_str();
  bench_cmd->add_option("--seed", bo.seed, "sketch seed")
      ->each([&](const std::string&) { bench_seed_given = true; });
  bench_cmd->add_option("--out", bo.out, "CSV output path ('' to skip)")->capture_default_str();

  VerifyOptions vo;
  CLI::App* verify_cmd = app.add_subcommand("verify", "true residual of a saved solution");
  add_problem_flags(verify_cmd, vo.problem);
  verify_cmd->add_option("--solution", vo.solution, "directory written by --save-solution")
      ->required();
  verify_cmd->add_option("--tol", vo.tol, "exit 3 above this residual")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    std::optional<std::uint64_t> env_seed;
    if (const char* s = std::getenv("LRMT_SEED"); s != nullptr && *s != '\0') {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(s, &end, 10);
      if (end == nullptr || *end != '\0') throw ConfigError("LRMT_SEED must be an integer");
      env_seed = v;
    }
    if (solve_cmd->parsed()) {
      if (!seed_given && env_seed) so.seed = *env_seed;
      return do_solve(so, out, err);
    }
    if (bench_cmd->parsed()) {
      if (!bench_seed_given && env_seed) bo.seed = *env_seed;
      return do_bench(bo, out, err);
    }
    return do_verify(vo, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ShapeError& e) {
    err << "shape error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace lrmt::cli
