// Error-prone scenario analysis: evaluates each catalog mode against a task
// model and a knowledge profile and emits located, typed defect forecasts.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hedp/error_catalog.hpp"
#include "hedp/model.hpp"
#include "json.hpp"

namespace hedp {

/// One satisfied condition behind a prediction. `operands` are entity ids
/// or numbers, enough to re-evaluate `primitive` against the inputs.
struct RationaleRecord {
  std::string primitive;
  std::vector<std::string> operands;
  std::string text;
  bool value = true;
  bool operator==(const RationaleRecord&) const = default;
};

struct Prediction {
  /// Stable identity, "<mode>:<binding site>".
  std::string prediction_id;
  /// "ES<n>", assigned after sorting.
  std::string scenario_ref;
  std::vector<ModeId> mode_ids;
  std::string defect_location;
  std::string defect_form;
  /// Scenario variable → bound entity id, in binding order.
  std::vector<std::pair<std::string, std::string>> bindings;
  std::vector<RationaleRecord> rationale;
  bool operator==(const Prediction&) const = default;
};

struct PredictionReport {
  std::string task_id;
  std::string profile_id;
  EngineConfig config;
  std::vector<Prediction> predictions;

  const Prediction* find(const std::string& id_or_ref) const;
};

class MissingRule : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs or configuration failed validation; `findings` says why.
class PreconditionFailed : public std::runtime_error {
 public:
  explicit PreconditionFailed(std::vector<ValidationFinding> findings);
  const std::vector<ValidationFinding>& findings() const { return findings_; }

 private:
  std::vector<ValidationFinding> findings_;
};

std::vector<Prediction> check_post_completion(const Subtask& root);

/// `location` is where a misapplied rule would show; defaults to the
/// requirement id.
std::vector<Prediction> check_strong_but_wrong(const RuleRequirement& req,
                                               const KnowledgeProfile& kb,
                                               const EngineConfig& cfg,
                                               const std::string& location = "");

/// The rule standing in for `req`: the rule of that id, or the first rule
/// with maximal feature overlap. Null when nothing overlaps.
const Rule* intended_rule(const RuleRequirement& req, const KnowledgeProfile& kb);

/// Throws MissingRule when no profile rule is intended for `req`.
std::vector<Prediction> check_encoding_deficiency(const RuleRequirement& req,
                                                  const KnowledgeProfile& kb,
                                                  const std::string& location = "");

/// Largest fraction of `features` a single rule's schema covers.
double best_overlap_fraction(const FeatureSet& features, const KnowledgeProfile& kb);

std::vector<Prediction> check_lack_of_knowledge(const TaskModel& task,
                                                const KnowledgeProfile& kb,
                                                const EngineConfig& cfg);

/// A proportional model y = a·x fitted to a sample prefix that reproduces the
/// prefix yet disagrees with the true relation further on.
struct LinearTrap {
  int depth = 0;
  double slope = 0;
  double divergent_x = 0;
};

/// Least-squares fit through the origin on the first `depth` samples.
/// Throws DegenerateSamples when every prefix x is zero.
std::optional<LinearTrap> linear_trap(const RelationSpec& rel, int depth, const EngineConfig& cfg);

std::vector<Prediction> check_exponential_difficulty(const RelationSpec& rel,
                                                     const EngineConfig& cfg);

std::vector<Prediction> check_selectivity(const std::vector<InfoItem>& items);

std::vector<Prediction> check_biased_review(const ReviewSpec& review, const EngineConfig& cfg);

/// Runs every catalog mode, merges predictions sharing location and form,
/// sorts by (location, mode, form) and numbers them ES1..n. A biased-review
/// prediction whose depth lets a linear model of the reviewed relation pass
/// is folded into that relation's exponential prediction.
PredictionReport predict_all(const std::vector<ErrorMode>& catalog, const TaskModel& task,
                             const KnowledgeProfile& kb, const EngineConfig& cfg);

nlohmann::json to_json(const EngineConfig& cfg);
EngineConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const PredictionReport& report);
PredictionReport report_from_json(const nlohmann::json& doc);

/// One block per prediction: location, form, modes, rationale lines.
std::string render_text(const PredictionReport& report);
/// One row per prediction.
std::string render_csv(const PredictionReport& report);

}  // namespace hedp
