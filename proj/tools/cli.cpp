#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "hedp/csv.hpp"
#include "hedp/defect_corpus.hpp"
#include "hedp/epsa_engine.hpp"
#include "hedp/error_catalog.hpp"
#include "hedp/metrics.hpp"
#include "hedp/model_io.hpp"

namespace hedp {

namespace {

constexpr const char* kVersion = "hedp 1.0.0";

using nlohmann::json;

/// A failure already phrased for the user, with its exit status.
struct Failure {
  int status;
  std::string message;
};

struct Options {
  std::vector<std::string> catalogs;
  std::string task;
  std::string profile;
  std::string corpus;
  std::string histories;
  std::string predictions;
  double strength_ratio = EngineConfig{}.strength_ratio;
  double overlap_threshold = EngineConfig{}.overlap_threshold;
  std::string review_depths = "all";
  double fit_tolerance = EngineConfig{}.fit_tolerance;
  std::string format = "text";
  std::string output;
  bool banner = false;
};

void add_engine_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--strength-ratio", o.strength_ratio, "theta: a >> b when a >= theta * max(b, 1)")
      ->capture_default_str();
  cmd->add_option("--overlap-threshold", o.overlap_threshold,
                  "tau: feature fraction a rule must cover to count as known")
      ->capture_default_str();
  cmd->add_option("--review-depths", o.review_depths,
                  "prefix lengths a self-review checks: 'all' or a list such as 2,3")
      ->capture_default_str();
  cmd->add_option("--fit-tolerance", o.fit_tolerance, "tolerance when a fit reproduces a sample")
      ->capture_default_str();
}

void add_output_flags(CLI::App* cmd, Options& o, const std::vector<std::string>& formats) {
  cmd->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember(formats))
      ->capture_default_str();
  cmd->add_option("--output", o.output, "output path; standard output when absent or '-'");
  cmd->add_flag("--banner", o.banner, "prefix text output with a version line");
}

EngineConfig engine_config(const Options& o) {
  EngineConfig cfg;
  cfg.strength_ratio = o.strength_ratio;
  cfg.overlap_threshold = o.overlap_threshold;
  cfg.fit_tolerance = o.fit_tolerance;
  if (o.review_depths != "all") {
    std::set<int> depths;
    std::stringstream ss(o.review_depths);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        int d = std::stoi(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
        depths.insert(d);
      } catch (const std::exception&) {
        throw Failure{kExitUsage, "--review-depths: '" + item + "' is not an integer"};
      }
    }
    if (depths.empty()) throw Failure{kExitUsage, "--review-depths: empty list"};
    cfg.review_depths = depths;
  }
  auto problems = cfg.validate();
  if (!problems.empty()) {
    std::string flag = "--fit-tolerance";
    const auto& p = problems.front();
    if (p.rfind("strength", 0) == 0) flag = "--strength-ratio";
    if (p.rfind("overlap", 0) == 0) flag = "--overlap-threshold";
    if (p.rfind("review", 0) == 0) flag = "--review-depths";
    throw Failure{kExitUsage, flag + ": " + p};
  }
  return cfg;
}

std::vector<ErrorMode> load_catalogs(const std::vector<std::string>& paths) {
  if (paths.empty()) return builtin_catalog();
  std::vector<ErrorMode> out;
  for (const auto& path : paths) {
    std::string text = read_text(path);
    try {
      out = merge_catalogs(std::move(out), load_catalog(text));
    } catch (const std::exception& e) {
      throw Failure{kExitUsage, path + ": " + e.what()};
    }
  }
  return out;
}

std::string histories_path(const Options& o) {
  if (!o.histories.empty()) return o.histories;
  if (o.corpus == "-") throw Failure{kExitUsage, "--histories is required when --corpus is '-'"};
  return std::filesystem::path(o.corpus).replace_extension(".history").string();
}

Corpus corpus_from(const Options& o) { return load_corpus(o.corpus, histories_path(o)); }

PredictionReport load_predictions(const std::string& path) {
  try {
    return report_from_json(json::parse(read_text(path)));
  } catch (const DocumentError&) {
    throw;
  } catch (const std::exception& e) {
    throw Failure{kExitUsage, path + ": " + e.what()};
  }
}

void emit(const Options& o, const std::string& text, std::ostream& out) {
  std::string body = (o.banner && o.format == "text") ? std::string(kVersion) + "\n\n" + text : text;
  if (o.output.empty() || o.output == "-") {
    out << body;
    return;
  }
  std::ofstream f(o.output, std::ios::binary);
  if (!f) throw Failure{kExitUsage, o.output + ": cannot open for writing"};
  f << body;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct Finding {
  std::string source;
  ValidationFinding finding;
};

int cmd_validate(const Options& o, std::ostream& out) {
  if (o.catalogs.empty() && o.task.empty() && o.profile.empty() && o.corpus.empty()) {
    throw Failure{kExitUsage, "validate: give at least one of --catalog, --task, --profile, --corpus"};
  }
  std::vector<Finding> findings;
  for (const auto& path : o.catalogs) {
    for (const auto& mode : load_catalogs({path})) {
      for (auto& f : validate_mode(mode)) findings.push_back({path, f});
    }
  }
  if (!o.task.empty()) {
    for (auto& f : validate_task(load_task(o.task))) findings.push_back({o.task, f});
  }
  if (!o.profile.empty()) {
    for (auto& f : validate_profile(load_profile(o.profile))) findings.push_back({o.profile, f});
  }
  if (!o.corpus.empty()) {
    for (auto& f : validate_corpus(corpus_from(o))) findings.push_back({o.corpus, f});
  }
  for (const auto& msg : engine_config(o).validate()) {
    findings.push_back({"engine", {"config", msg}});
  }

  std::string text;
  if (o.format == "document") {
    json doc = json::array();
    for (const auto& f : findings) {
      doc.push_back({{"source", f.source},
                     {"location_ref", f.finding.location_ref},
                     {"message", f.finding.message}});
    }
    text = doc.dump(2) + "\n";
  } else if (o.format == "csv") {
    text = csv_row({"source", "location_ref", "message"});
    for (const auto& f : findings) text += csv_row({f.source, f.finding.location_ref, f.finding.message});
  } else {
    for (const auto& f : findings) {
      text += f.source + ": " + f.finding.location_ref + ": " + f.finding.message + "\n";
    }
    text += std::to_string(findings.size()) + " finding(s)\n";
  }
  emit(o, text, out);
  return findings.empty() ? kExitOk : kExitFindings;
}

PredictionReport run_predict(const Options& o) {
  if (o.task.empty()) throw Failure{kExitUsage, "--task is required"};
  if (o.profile.empty()) throw Failure{kExitUsage, "--profile is required"};
  auto cfg = engine_config(o);
  auto catalog = load_catalogs(o.catalogs);
  return predict_all(catalog, load_task(o.task), load_profile(o.profile), cfg);
}

int cmd_predict(const Options& o, std::ostream& out) {
  auto report = run_predict(o);
  if (o.format == "document") {
    emit(o, to_json(report).dump(2) + "\n", out);
  } else if (o.format == "csv") {
    emit(o, render_csv(report), out);
  } else {
    emit(o, render_text(report), out);
  }
  return kExitOk;
}

void emit_metrics(const Options& o, const MetricsReport& metrics, std::ostream& out) {
  if (o.format == "document") {
    emit(o, to_json(metrics).dump(2) + "\n", out);
    return;
  }
  if (o.format == "text") {
    emit(o, render_tables(metrics), out);
    return;
  }
  auto tables = render_csv_tables(metrics);
  if (o.output.empty() || o.output == "-") {
    for (std::size_t i = 0; i < tables.size(); ++i) {
      if (i) out << "\n";
      out << "# " << tables[i].first << "\n" << tables[i].second;
    }
    return;
  }
  // A directory receives one file per table.
  std::filesystem::create_directories(o.output);
  for (const auto& [name, body] : tables) {
    auto path = std::filesystem::path(o.output) / (name + ".csv");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Failure{kExitUsage, path.string() + ": cannot open for writing"};
    f << body;
  }
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  if (o.corpus.empty()) throw Failure{kExitUsage, "--corpus is required"};
  auto corpus = corpus_from(o);
  auto findings = validate_corpus(corpus);
  if (!findings.empty()) {
    std::string msg = o.corpus + ": corpus is invalid";
    for (const auto& f : findings) msg += "\n  " + f.location_ref + ": " + f.message;
    throw Failure{kExitFindings, msg};
  }
  MatchMap matches = o.predictions.empty() ? match_from_table(corpus)
                                           : match_predictions(corpus, load_predictions(o.predictions));
  emit_metrics(o, evaluate(corpus, matches), out);
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
  if (o.corpus.empty()) throw Failure{kExitUsage, "--corpus is required"};
  auto report = run_predict(o);
  auto corpus = corpus_from(o);
  auto metrics = evaluate(corpus, match_predictions(corpus, report));
  if (o.format == "document") {
    json doc = {{"predictions", to_json(report)}, {"metrics", to_json(metrics)}};
    emit(o, doc.dump(2) + "\n", out);
  } else {
    emit(o, render_text(report) + "\n" + render_tables(metrics), out);
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Human-error based defect prediction"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto* validate = app.add_subcommand("validate", "check input files and report findings");
  validate->add_option("--catalog", o.catalogs, "scenario catalog (.eps), repeatable");
  validate->add_option("--task", o.task, "task model document");
  validate->add_option("--profile", o.profile, "knowledge profile document");
  validate->add_option("--corpus", o.corpus, "defect table (CSV)");
  validate->add_option("--histories", o.histories, "debugging histories; default: corpus path with .history");
  add_engine_flags(validate, o);
  add_output_flags(validate, o, {"text", "csv", "document"});

  auto* predict = app.add_subcommand("predict", "forecast defect locations and forms");
  predict->add_option("--catalog", o.catalogs, "scenario catalog (.eps), repeatable; default: built-in");
  predict->add_option("--task", o.task, "task model document")->required();
  predict->add_option("--profile", o.profile, "knowledge profile document")->required();
  add_engine_flags(predict, o);
  add_output_flags(predict, o, {"text", "csv", "document"});

  auto* evaluate = app.add_subcommand("evaluate", "score predictions against a defect corpus");
  evaluate->add_option("--corpus", o.corpus, "defect table (CSV)")->required();
  evaluate->add_option("--histories", o.histories, "debugging histories; default: corpus path with .history");
  evaluate->add_option("--predictions", o.predictions,
                       "prediction report document; default: the table's predicted_by column");
  add_output_flags(evaluate, o, {"text", "csv", "document"});

  auto* report = app.add_subcommand("report", "predict and evaluate in one summary");
  report->add_option("--catalog", o.catalogs, "scenario catalog (.eps), repeatable; default: built-in");
  report->add_option("--task", o.task, "task model document")->required();
  report->add_option("--profile", o.profile, "knowledge profile document")->required();
  report->add_option("--corpus", o.corpus, "defect table (CSV)")->required();
  report->add_option("--histories", o.histories, "debugging histories; default: corpus path with .history");
  add_engine_flags(report, o);
  add_output_flags(report, o, {"text", "document"});

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int status = app.exit(e, out, err);
    return status == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(o, out);
    if (*predict) return cmd_predict(o, out);
    if (*evaluate) return cmd_evaluate(o, out);
    return cmd_report(o, out);
  } catch (const Failure& f) {
    err << "error: " << f.message << "\n";
    return f.status;
  } catch (const PreconditionFailed& e) {
    err << "error: inputs failed validation\n";
    for (const auto& f : e.findings()) err << "  " << f.location_ref << ": " << f.message << "\n";
    return kExitFindings;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace hedp
