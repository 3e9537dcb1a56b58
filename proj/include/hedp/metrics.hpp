// Effectiveness measures comparing a prediction report with a defect corpus:
// coverage, persistence, per-programmer error rates, saved debugging
// iterations and the counterfactual acceptance rate.
//
// Values are kept unrounded. Rates of occurrence and coverages are
// percentages in [0, 100]; every other measure is a ratio in [0, 1].
// Rounding happens only when rendering.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hedp/defect_corpus.hpp"
#include "hedp/epsa_engine.hpp"
#include "json.hpp"

namespace hedp {

class EmptyScope : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DefectNotPresent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Which prediction, if any, covers each corpus defect.
struct MatchMap {
  std::map<std::string, std::optional<std::string>> pairs;
  /// Number of predictions made, P, the alarm count behind false positives.
  int prediction_count = 0;

  bool predicted(const std::string& defect_id) const;
  std::set<std::string> predicted_set() const;
};

/// Resolves each defect's `predicted_by` against the report, by prediction
/// id or scenario ref, storing the prediction id. Throws CorpusError for a
/// reference the report does not contain.
MatchMap match_predictions(const Corpus& corpus, const PredictionReport& report);

/// Match map from the defect table alone, for corpora evaluated without a
/// report. `prediction_count` is the number of distinct references.
MatchMap match_from_table(const Corpus& corpus);

enum class Scope { kAll, kCoincident };

double rate_of_occurrence(const Corpus& corpus, const std::string& defect_id);

/// Percentage of in-scope defects that are matched. Throws EmptyScope.
double coverage_unique(const MatchMap& matches, const Corpus& corpus, Scope scope);
/// Matched share of in-scope occurrences. Throws EmptyScope.
double coverage_occurrences(const MatchMap& matches, const Corpus& corpus, Scope scope);

/// Versions with the defect present over versions from its introduction to
/// the last. Throws DefectNotPresent.
double persistence(const DebugHistory& history, const std::string& defect_id);
/// Mean persistence over the histories that had the defect.
double degree_of_persistence(const Corpus& corpus, const std::string& defect_id);
/// Mean degree of persistence over `defects`. Throws EmptyScope.
double appd(const Corpus& corpus, const std::set<std::string>& defects);
/// Mean degree of persistence over unmatched defects that occur at least once.
double non_predicted_persistence(const Corpus& corpus, const MatchMap& matches);

struct ProgrammerStats {
  std::string programmer_id;
  int present = 0;
  int true_positives = 0;
  int false_negatives = 0;
  int false_positives = 0;
  /// Undefined when nothing was present.
  std::optional<double> coverage;
  double fdr = 0;
  double fnr = 0;
};

struct PerProgrammerSummary {
  std::vector<ProgrammerStats> programmers;
  /// Mean coverage over programmers with at least one defect.
  std::optional<double> coverage_per_programmer;
  double avg_fdr = 0;
  double avg_fnr = 0;
  double avg_defects_present = 0;
  double avg_true_positives = 0;
  double avg_false_positives = 0;
};

/// Participants without a history count as defect-free programmers.
PerProgrammerSummary per_programmer_stats(const MatchMap& matches, const Corpus& corpus);

/// Share of versions made unnecessary by preventing the predicted defects.
/// Throws DefectNotPresent for a defect-free history.
double sde(const DebugHistory& history, const MatchMap& matches);

struct AsdeSummary {
  double mean = 0;
  double min = 0;
  double max = 0;
  /// Sample standard deviation; 0 for a single programmer.
  double sd = 0;
  int programmers = 0;
};

/// Over histories with at least one defect. Throws EmptyScope.
AsdeSummary asde(const Corpus& corpus, const MatchMap& matches);

struct AcceptanceUplift {
  int programmers = 0;
  int accepted_now = 0;
  int accepted_if_predicted_removed = 0;
  double rate_now = 0;
  double rate_if_predicted_removed = 0;
};

/// Over histories with at least one defect. Throws EmptyScope.
AcceptanceUplift acceptance_uplift(const Corpus& corpus, const MatchMap& matches);

struct DefectRow {
  std::string defect_id;
  std::string description;
  int occurrence = 0;
  double rate_of_occurrence = 0;
  bool coincident = false;
  std::optional<std::string> predicted_by;
};

struct PersistenceRow {
  std::string defect_id;
  int occurrence = 0;
  int versions_present = 0;
  double min = 0;
  double max = 0;
  double mean = 0;
  bool predicted = false;
};

struct MetricsReport {
  int participants = 0;
  int prediction_count = 0;
  std::vector<DefectRow> defects;
  int occurrence_total = 0;
  int coincident_count = 0;
  int coincident_occurrences = 0;
  int predicted_count = 0;
  int predicted_coincident_count = 0;
  int predicted_occurrences = 0;
  int predicted_coincident_occurrences = 0;

  std::optional<double> coverage_unique_total;
  std::optional<double> coverage_unique_coincident;
  std::optional<double> coverage_occurrences_total;
  std::optional<double> coverage_occurrences_coincident;

  std::vector<PersistenceRow> persistence;
  std::optional<double> appd;
  std::optional<double> non_predicted_mean;
  int iterations_predicted = 0;
  int iterations_total = 0;

  PerProgrammerSummary per_programmer;
  std::vector<std::pair<std::string, double>> sde;
  std::optional<AsdeSummary> asde;
  std::optional<AcceptanceUplift> acceptance;
};

MetricsReport evaluate(const Corpus& corpus, const MatchMap& matches);

nlohmann::json to_json(const MetricsReport& report);
/// Text tables: defects, unique coverage, occurrence coverage, persistence,
/// predicted persistence, per-programmer categories, debugging effort.
std::string render_tables(const MetricsReport& report);
/// One CSV document per table, keyed by table name.
std::vector<std::pair<std::string, std::string>> render_csv_tables(const MetricsReport& report);

}  // namespace hedp
