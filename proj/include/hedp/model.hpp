// Shared domain vocabulary: what a task demands, what a programmer knows,
// and the feature algebra both are described in.
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace hedp {

/// A finite set of feature tags. Ordered so that printing is deterministic.
using FeatureSet = std::set<std::string>;

FeatureSet feature_overlap(const FeatureSet& a, const FeatureSet& b);
FeatureSet feature_difference(const FeatureSet& a, const FeatureSet& b);
/// Non-strict inclusion: every tag of `inner` is in `outer`.
bool feature_includes(const FeatureSet& outer, const FeatureSet& inner);
/// Strict inclusion, the `⊂` of the scenario notation.
bool feature_proper_subset(const FeatureSet& inner, const FeatureSet& outer);
std::string format_features(const FeatureSet& fs);
/// Integers without a decimal point, everything else to 6 significant digits.
std::string format_number(double v);

// ---------------------------------------------------------------------------
// Knowledge profile
// ---------------------------------------------------------------------------

struct SubRule {
  std::string id;
  bool encoded = true;
  bool integrated = true;
  /// Defect form predicted when this sub-rule is missing from the schema.
  std::string deficiency_form;

  bool deficient() const { return !encoded || !integrated; }
  bool operator==(const SubRule&) const = default;
};

enum class RuleKind { kSpecific, kGeneral };

struct Rule {
  std::string id;
  FeatureSet features;
  std::int64_t usage_count = 0;
  std::vector<SubRule> subrules;
  RuleKind kind = RuleKind::kSpecific;
  /// Short phrase describing what applying the rule produces (e.g. `"0"`),
  /// substituted into strong-but-wrong defect forms.
  std::string manifest;
  /// Optional per-feature counts of successful use. A feature absent here
  /// falls back to `usage_count`.
  std::vector<std::pair<std::string, std::int64_t>> context_usage;

  /// Declared features plus every encoded-and-integrated sub-rule id: the
  /// schema as the programmer actually holds it.
  FeatureSet effective_features() const;
  /// Declared features plus every sub-rule id: the complete schema.
  FeatureSet complete_features() const;
  /// Successful uses in contexts exhibiting all of `context`.
  std::int64_t usage_in_context(const FeatureSet& context) const;

  bool operator==(const Rule&) const = default;
};

struct KnowledgeProfile {
  std::string profile_id;
  std::vector<Rule> rules;
  std::string provenance;

  const Rule* find(const std::string& rule_id) const;
  bool operator==(const KnowledgeProfile&) const = default;
};

// ---------------------------------------------------------------------------
// Task model
// ---------------------------------------------------------------------------

/// Either an exact rule id or a capability described by features.
struct RuleRequirement {
  std::string id;
  std::optional<std::string> rule_id;
  std::optional<FeatureSet> features;
  /// Template for strong-but-wrong forms; `{A}` and `{B}` are replaced by the
  /// rules' manifest phrases.
  std::string substitution_form;
  std::string failure_form;

  std::string describe() const;
  bool operator==(const RuleRequirement&) const = default;
};

struct Subtask {
  std::string id;
  std::string description;
  std::vector<Subtask> children;
  bool is_main = false;
  bool necessary_for_parent = true;
  std::vector<RuleRequirement> required_rules;
  /// The requirements are alternatives; one satisfied is enough.
  bool any_of = false;
  std::string location_ref;
  std::string omission_form;
  std::string failure_form;

  bool operator==(const Subtask&) const = default;
};

struct InfoItem {
  std::string id;
  std::string location_ref;
  int saliency = 0;
  int logic_importance = 0;
  std::string content;
  std::string omission_form;
  /// Where an omission of this item shows up in the solution; defaults to
  /// `location_ref`.
  std::string manifests_at;

  const std::string& defect_location() const {
    return manifests_at.empty() ? location_ref : manifests_at;
  }
  bool operator==(const InfoItem&) const = default;
};

enum class RelationFamily { kPower, kExponential, kAffineExponential, kLinear };

struct Sample {
  double x = 0;
  double y = 0;
  bool operator==(const Sample&) const = default;
};

struct RelationSpec {
  std::string id;
  std::vector<Sample> samples;
  RelationFamily true_family = RelationFamily::kLinear;
  std::vector<double> true_params;
  std::string location_ref;
  std::string x_name = "x";
  std::string y_name = "y";
  /// Noun phrase naming the relation, e.g. "the height and nest level".
  std::string description;
  /// Inclusive integer range of meaningful x values, when known.
  std::optional<std::pair<int, int>> domain;

  double evaluate(double x) const;
  /// Human-readable true model such as `h=2^{n+2}`.
  std::string render_true_model() const;
  bool operator==(const RelationSpec&) const = default;
};

struct ReviewSpec {
  std::string id = "review";
  int n_conditions = 0;
  std::vector<std::string> condition_refs;
  std::string location_ref;
  /// Relation whose samples are the reviewed conditions, if any.
  std::string subject_ref;
  bool operator==(const ReviewSpec&) const = default;
};

struct SpecLine {
  std::string line_id;
  std::string text;
  bool operator==(const SpecLine&) const = default;
};

struct TaskModel {
  std::string task_id;
  std::vector<SpecLine> spec_lines;
  Subtask root;
  std::vector<InfoItem> info_items;
  std::vector<RelationSpec> relations;
  std::optional<ReviewSpec> review_items;

  bool operator==(const TaskModel&) const = default;
};

struct ValidationFinding {
  std::string location_ref;
  std::string message;
  bool operator==(const ValidationFinding&) const = default;
};

std::vector<ValidationFinding> validate_task(const TaskModel& task);
std::vector<ValidationFinding> validate_profile(const KnowledgeProfile& kb);

/// Splits a comma-separated location reference into its parts.
std::vector<std::string> split_location(const std::string& ref);
/// True if every part of `ref` names a spec line or subtask of `task`.
bool resolves(const TaskModel& task, const std::string& ref);

/// Depth-first, pre-order visit of every node.
template <typename Fn>
void for_each_subtask(const Subtask& node, Fn&& fn) {
  fn(node);
  for (const auto& child : node.children) for_each_subtask(child, fn);
}

const char* to_string(RelationFamily family);
std::optional<RelationFamily> relation_family_from_string(const std::string& s);
const char* to_string(RuleKind kind);

}  // namespace hedp
