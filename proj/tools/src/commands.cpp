#include "specinfer/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "specinfer/compiler.hpp"
#include "specinfer/error.hpp"
#include "specinfer/planner.hpp"

namespace specinfer::cli {

using nlohmann::ordered_json;

namespace {

template <class F>
auto staged(const std::string& stage, const std::string& candidate, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, candidate, e.what(), std::current_exception());
  }
}

std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  const std::string s = buf;
  return s == "-0.000000" ? "0.000000" : s;
}

std::string seconds(double s, const Output& opts) { return opts.timing ? num(s) : "NA"; }

ordered_json seconds_json(double s, const Output& opts) {
  return opts.timing ? ordered_json(s) : ordered_json(nullptr);
}

void emit(std::ostream& out, const ordered_json& j) { out << j.dump(2) << '\n'; }

Problem prepared(const RunConfig& config) {
  return staged("parse", "", [&] { return prepare(config); });
}

} // namespace

void cmd_rank(const RunConfig& config, const Output& opts, std::ostream& out) {
  const Problem problem = prepared(config);
  RankOptions options;
  options.fit.tolerance = config.tolerance;
  options.p_target = config.p_target;
  options.jobs = opts.jobs;
  const LikelihoodReport report = rank(problem.pa, problem.candidates, problem.demos, problem.horizon, options);

  if (opts.format == Format::structured) {
    ordered_json rows = ordered_json::array();
    for (const ReportRow& r : report.rows) {
      rows.push_back({{"spec", r.name},
                      {"internal_nodes", r.internal_nodes},
                      {"total_nodes", r.total_nodes},
                      {"compile_seconds", seconds_json(r.compile_seconds, opts)},
                      {"theta", r.theta},
                      {"p_hat", r.p_hat},
                      {"p_fit", r.p_fit},
                      {"converged", r.converged},
                      {"log_likelihood", r.log_likelihood},
                      {"relative_log_likelihood", r.relative_log_likelihood},
                      {"log_prior", r.log_prior},
                      {"log_posterior", r.log_posterior}});
    }
    emit(out, {{"command", "rank"},
               {"horizon", problem.horizon},
               {"demos", problem.demos.size()},
               {"baseline_log_likelihood", report.baseline_log_likelihood},
               {"rows", rows}});
    return;
  }
  out << "spec\tinternal_nodes\tcompile_seconds\ttheta\tp_hat\tlog_likelihood\trelative_log_likelihood\t"
         "log_posterior\n";
  for (const ReportRow& r : report.rows) {
    out << r.name << '\t' << r.internal_nodes << '\t' << seconds(r.compile_seconds, opts) << '\t' << num(r.theta)
        << '\t' << num(r.p_hat) << '\t' << num(r.log_likelihood) << '\t' << num(r.relative_log_likelihood) << '\t'
        << num(r.log_posterior) << '\n';
  }
}

void cmd_stats(const RunConfig& config, const Output& opts, std::ostream& out) {
  const Problem problem = prepared(config);
  struct Row {
    unsigned history_bits = 0;
    CompileStats stats;
    std::uint64_t bound = 0;
    std::uint64_t explicit_size = 0;
  };
  std::vector<Row> rows(problem.candidates.size());
  parallel_for(rows.size(), opts.jobs, [&](std::size_t i) {
    const Candidate& c = problem.candidates[i];
    const TraceBdd b = staged("compile", c.name, [&] { return unroll(problem.pa, c.monitor, problem.horizon); });
    rows[i] = Row{c.monitor.history_bits, b.stats(), size_bound(problem.pa, c.monitor, problem.horizon),
                  explicit_product_size(problem.pa, c.monitor, problem.horizon)};
  });

  if (opts.format == Format::structured) {
    ordered_json list = ordered_json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& r = rows[i];
      list.push_back({{"spec", problem.candidates[i].name},
                      {"history_bits", r.history_bits},
                      {"internal_nodes", r.stats.internal_nodes},
                      {"total_nodes", r.stats.total_nodes},
                      {"levels", r.stats.levels},
                      {"size_bound", r.bound},
                      {"explicit_product", r.explicit_size},
                      {"compile_seconds", seconds_json(r.stats.seconds, opts)}});
    }
    emit(out, {{"command", "stats"}, {"horizon", problem.horizon}, {"rows", list}});
    return;
  }
  out << "spec\thistory_bits\tinternal_nodes\ttotal_nodes\tsize_bound\texplicit_product\tcompile_seconds\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    out << problem.candidates[i].name << '\t' << r.history_bits << '\t' << r.stats.internal_nodes << '\t'
        << r.stats.total_nodes << '\t' << r.bound << '\t' << r.explicit_size << '\t'
        << seconds(r.stats.seconds, opts) << '\n';
  }
}

void cmd_eval(const RunConfig& config, const std::string& spec, double theta, const Output& opts, std::ostream& out) {
  const Problem problem = prepared(config);
  const Candidate* chosen = nullptr;
  for (const Candidate& c : problem.candidates) {
    if (c.name == spec) chosen = &c;
  }
  if (chosen == nullptr) throw StageError("parse", spec, "unknown spec '" + spec + "'", nullptr);
  const TraceBdd b = staged("compile", spec, [&] { return unroll(problem.pa, chosen->monitor, problem.horizon); });
  const ValueTable vt = staged("fit", spec, [&] { return value_backup(b, theta); });
  const double p = sat_prob(b, vt);
  const std::vector<double> lls = staged("encode", spec, [&] {
    std::vector<double> out_ll;
    for (std::size_t i = 0; i < problem.demos.size(); ++i) {
      out_ll.push_back(demo_log_likelihood(b, vt, encode_demo(problem.pa, b.meta(), problem.demos[i], i)));
    }
    return out_ll;
  });

  if (opts.format == Format::structured) {
    emit(out, {{"command", "eval"},
               {"spec", spec},
               {"theta", theta},
               {"root_value", vt.root_value()},
               {"p", p},
               {"demo_log_likelihoods", lls}});
    return;
  }
  out << "spec\ttheta\troot_value\tp\n"
      << spec << '\t' << num(theta) << '\t' << num(vt.root_value()) << '\t' << num(p) << '\n';
  out << "\ndemo\tlog_likelihood\n";
  for (std::size_t i = 0; i < lls.size(); ++i) out << i << '\t' << num(lls[i]) << '\n';
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rank task specifications by how well they explain demonstrations"};
  app.require_subcommand(1);
  std::string config_path;
  std::string format = "tsv";
  Output opts;
  std::string spec;
  double theta = 0.0;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration (JSON)")->required();
    sub->add_option("--jobs", opts.jobs, "Candidates processed concurrently")->check(CLI::PositiveNumber);
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"tsv", "structured"}));
    sub->add_flag("--timing", opts.timing, "Report wall-clock compile times");
  };
  CLI::App* rank_cmd = app.add_subcommand("rank", "Fit every candidate and rank by posterior");
  CLI::App* stats_cmd = app.add_subcommand("stats", "Compile every candidate and report diagram sizes");
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate one candidate at a fixed rationality");
  common(rank_cmd);
  common(stats_cmd);
  common(eval_cmd);
  eval_cmd->add_option("--spec", spec, "Candidate name")->required();
  eval_cmd->add_option("--theta", theta, "Rationality coefficient")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  opts.format = format == "structured" ? Format::structured : Format::tsv;

  try {
    const RunConfig config = staged("parse", "", [&] { return load_config(config_path); });
    if (rank_cmd->parsed()) cmd_rank(config, opts, out);
    if (stats_cmd->parsed()) cmd_stats(config, opts, out);
    if (eval_cmd->parsed()) cmd_eval(config, spec, theta, opts, out);
    return 0;
  } catch (const StageError& e) {
    bool internal = false;
    if (e.cause()) {
      try {
        std::rethrow_exception(e.cause());
      } catch (const StructuralError&) {
        internal = true;
      } catch (const Error&) {
      } catch (...) {
        internal = true;
      }
    }
    err << "specinfer: " << (internal ? "internal error during " : "") << e.stage();
    if (!e.candidate().empty()) err << " [" << e.candidate() << "]";
    err << ": " << e.what() << '\n';
    return internal ? 2 : 1;
  } catch (const Error& e) {
    err << "specinfer: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "specinfer: internal error: " << e.what() << '\n';
    return 2;
  }
}

} // namespace specinfer::cli
