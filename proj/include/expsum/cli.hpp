#pragma once

// Command-line front end. Exit codes: 0 success, 2 usage or input error,
// 3 no solver start converged, 4 gradient check failure.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "expsum/analysis.hpp"
#include "expsum/errors.hpp"
#include "expsum/geometry.hpp"
#include "expsum/gradcheck.hpp"
#include "expsum/io.hpp"
#include "expsum/solver.hpp"
#include "expsum/variety.hpp"

namespace expsum::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNoConvergence = 3;
inline constexpr int kExitCheckFailed = 4;

struct ScanRow {
  std::size_t n = 0;
  double d2_candidate = 0.0;
  double log2n = 0.0;
  double stolarsky_gap = 0.0;
  std::optional<double> d2_solver;
};

inline ScanRow scan_row(std::size_t n) {
  const CandidateFrame frame = candidate(n);
  const double log_n = std::log(static_cast<double>(n));
  ScanRow row;
  row.n = n;
  row.d2_candidate = frame.dist2_closed_form;
  row.log2n = log_n * log_n;
  row.stolarsky_gap = row.d2_candidate - row.log2n;
  return row;
}

/// `samples` distinct integers spread geometrically over [from, to], always
/// including both ends (fewer when the range is too narrow).
inline std::vector<std::size_t> log_spaced(std::size_t from, std::size_t to, std::size_t samples) {
  std::set<std::size_t> picked{from, to};
  if (samples > 1) {
    const double ratio = std::log(static_cast<double>(to) / static_cast<double>(from));
    for (std::size_t i = 0; i < samples; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(samples - 1);
      picked.insert(static_cast<std::size_t>(
          std::llround(static_cast<double>(from) * std::exp(ratio * t))));
    }
  }
  return {picked.begin(), picked.end()};
}

inline std::size_t threads_from_env() {
  if (const char* env = std::getenv("EXPSUM_THREADS")) {
    try {
      const long value = std::stol(env);
      if (value > 0) return static_cast<std::size_t>(value);
    } catch (const std::exception&) {
    }
  }
  return 0;
}

/// Writes to `path`, or to `fallback` when path is empty.
template <typename Writer>
void emit(const std::string& path, std::ostream& fallback, Writer&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::Parse, "cannot open output file " + path);
  write(file);
}

inline bool wants_csv(const std::string& format, const std::string& path) {
  if (format == "csv") return true;
  if (format == "json") return false;
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

inline int cmd_candidate(std::size_t n, bool json, std::ostream& out) {
  const CandidateFrame frame = candidate(n);
  if (json) {
    out << frame_to_json(frame).dump() << '\n';
    return kExitOk;
  }
  out << "n       " << n << '\n'
      << "k       " << format_short(frame.k.real()) << " + " << format_short(frame.k.imag())
      << "i\n"
      << "dist2   " << format_short(frame.dist2_closed_form) << '\n'
      << "d       " << format_short(std::sqrt(frame.dist2_closed_form)) << '\n';
  return kExitOk;
}

struct SolveArgs {
  SolveConfig cfg;
  std::string out_path;
  std::string format;
  bool json = false;
};

inline int cmd_solve(const SolveArgs& args, std::ostream& out) {
  const std::vector<SolveResult> results = solve(args.cfg);
  const double reference = candidate(args.cfg.n).dist2_closed_form;
  const double best = results.front().dist2;
  const double gap = (best - reference) / reference;
  const auto converged = static_cast<std::size_t>(std::count_if(
      results.begin(), results.end(), [](const SolveResult& r) { return r.converged; }));

  if (!args.out_path.empty()) {
    emit(args.out_path, out, [&](std::ostream& os) {
      if (wants_csv(args.format, args.out_path)) {
        write_results_csv(os, results);
      } else {
        os << results_to_json(results).dump(2) << '\n';
      }
    });
  }
  if (args.json) {
    Json summary = {{"n", args.cfg.n},
                    {"starts", args.cfg.starts},
                    {"converged", converged},
                    {"best_dist2", best},
                    {"candidate_dist2", reference},
                    {"relative_gap", gap},
                    {"best", result_to_json(results.front())}};
    out << summary.dump() << '\n';
  } else {
    out << "best dist2       " << format_short(best) << "  (d = " << format_short(std::sqrt(best))
        << ")\n"
        << "candidate dist2  " << format_short(reference) << '\n'
        << "relative gap     " << format_short(gap) << '\n'
        << "converged        " << converged << " / " << results.size() << '\n';
  }
  return converged > 0 ? kExitOk : kExitNoConvergence;
}

inline int cmd_verify(const std::string& path, double tol, bool json, bool csv, std::ostream& out) {
  std::ifstream file(path);
  if (!file) throw Error(ErrorKind::Parse, "cannot open " + path);
  const std::vector<Point> points = points_from_json(parse_json(file));

  Json all = Json::array();
  if (csv) out << kLemmaCsvHeader << '\n';
  for (std::size_t i = 0; i < points.size(); ++i) {
    const HypothesisReport hyp = check_hypotheses(points[i], tol);
    const std::vector<LemmaReport> lemmas = verify_lemmas(points[i]);
    if (csv) {
      for (const LemmaReport& r : lemmas) write_lemma_csv_row(out, i, r);
    } else if (json) {
      Json entry = {{"point", i}, {"hypotheses", hypotheses_to_json(hyp)}};
      Json reports = Json::array();
      for (const LemmaReport& r : lemmas) reports.push_back(lemma_to_json(r));
      entry["lemmas"] = std::move(reports);
      all.push_back(std::move(entry));
    } else {
      out << "point " << i << " (n = " << points[i].n() << ")\n";
      for (int c = 1; c <= 6; ++c) {
        out << "  (" << c << ") " << (hyp[c].holds ? "holds " : "FAILS ") << "margin "
            << format_short(hyp[c].margin) << '\n';
      }
      for (const LemmaReport& r : lemmas) {
        out << "  " << r.lemma << (r.holds ? " holds " : " FAILS ") << "margin "
            << format_short(r.margin);
        if (!r.note.empty()) out << "  [" << r.note << "]";
        out << '\n';
      }
    }
  }
  if (json && !csv) out << all.dump(2) << '\n';
  return kExitOk;
}

struct ScanArgs {
  std::size_t from = 2;
  std::size_t to = 2;
  std::size_t step = 1;
  std::size_t samples = 0;  // > 0 selects log spacing
  bool solve = false;
  std::size_t starts = 64;
  std::uint64_t seed = 0;
  std::string out_path;
  bool json = false;
};

inline std::vector<ScanRow> run_scan(const ScanArgs& args) {
  if (args.from < 2 || args.from > args.to || args.step < 1) {
    throw Error(ErrorKind::Parse, "scan range requires 2 ≤ from ≤ to and step ≥ 1");
  }
  std::vector<std::size_t> ns;
  if (args.samples > 0) {
    ns = log_spaced(args.from, args.to, args.samples);
  } else {
    for (std::size_t n = args.from; n <= args.to; n += args.step) ns.push_back(n);
  }
  std::vector<ScanRow> rows;
  rows.reserve(ns.size());
  for (std::size_t n : ns) {
    ScanRow row = scan_row(n);
    if (args.solve) {
      SolveConfig cfg;
      cfg.n = n;
      cfg.starts = args.starts;
      cfg.seed = args.seed;
      cfg.threads = threads_from_env();
      row.d2_solver = solve(cfg).front().dist2;
    }
    rows.push_back(row);
  }
  return rows;
}

inline int cmd_scan(const ScanArgs& args, std::ostream& out) {
  const std::vector<ScanRow> rows = run_scan(args);
  emit(args.out_path, out, [&](std::ostream& os) {
    if (args.json) {
      Json arr = Json::array();
      for (const ScanRow& r : rows) {
        Json j = {{"n", r.n},
                  {"d2_candidate", r.d2_candidate},
                  {"log2n", r.log2n},
                  {"stolarsky_gap", r.stolarsky_gap}};
        if (r.d2_solver) j["d2_solver"] = *r.d2_solver;
        arr.push_back(std::move(j));
      }
      os << arr.dump(2) << '\n';
      return;
    }
    os << "n,d2_candidate,log2n,stolarsky_gap" << (args.solve ? ",d2_solver" : "") << '\n';
    for (const ScanRow& r : rows) {
      os << r.n << ',' << format_full(r.d2_candidate) << ',' << format_full(r.log2n) << ','
         << format_full(r.stolarsky_gap);
      if (r.d2_solver) os << ',' << format_full(*r.d2_solver);
      os << '\n';
    }
  });
  return kExitOk;
}

/// Gradient and retraction checks over an explicit point set; exit 0 when the
/// worst relative derivative error is within `threshold`, else 4.
inline int run_gradcheck(const std::vector<Point>& points, double threshold, bool json,
                         std::ostream& out, std::ostream& err) {
  constexpr double kRetractionRatioLimit = 1.5;
  GradCheckSummary summary;
  try {
    summary = gradient_check(points);
  } catch (const Error& e) {
    err << "gradcheck failed: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  const bool ok =
      summary.max_error() <= threshold && summary.max_retraction_ratio <= kRetractionRatioLimit;
  if (json) {
    out << Json{{"points", summary.points},
                {"max_rel_err", summary.max_error()},
                {"constraint_rel_err", summary.max_constraint_error},
                {"distance_rel_err", summary.max_distance_error},
                {"retraction_ratio", summary.max_retraction_ratio},
                {"ok", ok}}
               .dump()
        << '\n';
  } else {
    out << "points              " << summary.points << '\n'
        << "max rel err         " << format_short(summary.max_error()) << '\n'
        << "retraction ratio    " << format_short(summary.max_retraction_ratio) << '\n';
  }
  if (!ok) {
    err << "worst case: " << summary.worst << '\n';
    return kExitCheckFailed;
  }
  return kExitOk;
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distance between the diagonal of C^n and the zero set of sum_j exp(z_j)",
               "expsum"};
  app.require_subcommand(1);
  bool json = false;
  std::string out_path;
  std::optional<double> tol;
  app.add_flag("--json", json, "Machine-readable JSON output");
  app.add_option("--out", out_path, "Output file");
  app.add_option("--tol", tol, "Tolerance (solve: gradient; verify: hypotheses; gradcheck: error)")
      ->check(CLI::PositiveNumber);

  std::size_t cand_n = 0;
  auto* candidate_cmd = app.add_subcommand("candidate", "Closed-form candidate point")->fallthrough();
  candidate_cmd->add_option("--n", cand_n, "Dimension")->required();

  SolveArgs solve_args;
  std::size_t solve_n = 0;
  auto* solve_cmd = app.add_subcommand("solve", "Multi-start nearest-point search")->fallthrough();
  solve_cmd->add_option("--n", solve_n, "Dimension")->required();
  solve_cmd->add_option("--starts", solve_args.cfg.starts, "Number of starts")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--seed", solve_args.cfg.seed, "Seed");
  solve_cmd->add_option("--max-iter", solve_args.cfg.max_iter, "Iterations per start")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--step0", solve_args.cfg.step0, "Initial step")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--scale", solve_args.cfg.scale, "Start sampling half-width")
      ->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--format", solve_args.format, "Format of --out file")
      ->check(CLI::IsMember({"json", "csv"}));

  std::string verify_path;
  bool verify_csv = false;
  auto* verify_cmd =
      app.add_subcommand("verify", "Check hypotheses and lemma statements at points")->fallthrough();
  verify_cmd->add_option("point_file", verify_path, "Point JSON file")->required();
  verify_cmd->add_flag("--csv", verify_csv, "One CSV row per (point, lemma)");

  ScanArgs scan_args;
  auto* scan_cmd = app.add_subcommand("scan", "Candidate distance versus (log n)^2")->fallthrough();
  scan_cmd->add_option("--from", scan_args.from, "First n")->required();
  scan_cmd->add_option("--to", scan_args.to, "Last n")->required();
  scan_cmd->add_option("--step", scan_args.step, "Linear step");
  scan_cmd->add_option("--samples", scan_args.samples, "Log-spaced sample count");
  scan_cmd->add_flag("--solve", scan_args.solve, "Also run the solver per n");
  scan_cmd->add_option("--starts", scan_args.starts, "Solver starts per n")
      ->check(CLI::PositiveNumber);
  scan_cmd->add_option("--seed", scan_args.seed, "Solver seed");

  std::size_t grad_n = 0;
  std::uint64_t grad_seed = 0;
  std::size_t grad_points = 100;
  auto* grad_cmd =
      app.add_subcommand("gradcheck", "Finite-difference derivative checks")->fallthrough();
  grad_cmd->add_option("--n", grad_n, "Dimension")->required();
  grad_cmd->add_option("--seed", grad_seed, "Seed");
  grad_cmd->add_option("--points", grad_points, "Number of random points")
      ->check(CLI::PositiveNumber);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*candidate_cmd) return cmd_candidate(cand_n, json, out);
    if (*solve_cmd) {
      solve_args.cfg.n = solve_n;
      if (tol) solve_args.cfg.tol_grad = *tol;
      solve_args.cfg.threads = threads_from_env();
      solve_args.out_path = out_path;
      solve_args.json = json;
      return cmd_solve(solve_args, out);
    }
    if (*verify_cmd) {
      return cmd_verify(verify_path, tol.value_or(kDefaultHypothesisTol), json, verify_csv, out);
    }
    if (*scan_cmd) {
      scan_args.out_path = out_path;
      scan_args.json = json;
      return cmd_scan(scan_args, out);
    }
    if (*grad_cmd) {
      if (grad_n < 2) throw Error(ErrorKind::DimensionTooSmall, "n must be ≥ 2");
      return run_gradcheck(gradcheck_points(grad_n, grad_seed, grad_points), tol.value_or(1e-6),
                           json, out, err);
    }
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace expsum::cli
