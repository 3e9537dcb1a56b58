#include "hedp/epsa_engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "hedp/csv.hpp"

namespace hedp {

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t at = s.find(from); at != std::string::npos; at = s.find(from, at + to.size()))
    s.replace(at, from.size(), to);
  return s;
}

std::string summarize(const std::vector<ValidationFinding>& findings) {
  std::string out = "inputs failed validation:";
  for (const auto& f : findings) out += "\n  " + f.location_ref + ": " + f.message;
  return out;
}

Prediction make(ModeId mode, std::string id, std::string location, std::string form) {
  Prediction p;
  p.prediction_id = std::string(to_string(mode)) + ":" + id;
  p.mode_ids = {mode};
  p.defect_location = std::move(location);
  p.defect_form = std::move(form);
  return p;
}

}  // namespace

PreconditionFailed::PreconditionFailed(std::vector<ValidationFinding> findings)
    : std::runtime_error(summarize(findings)), findings_(std::move(findings)) {}

const Prediction* PredictionReport::find(const std::string& id_or_ref) const {
  for (const auto& p : predictions)
    if (p.prediction_id == id_or_ref || p.scenario_ref == id_or_ref) return &p;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Post-completion
// ---------------------------------------------------------------------------

namespace {

void post_completion_visit(const Subtask& parent, std::vector<Prediction>& out) {
  if (parent.children.size() >= 2) {
    const Subtask* main = nullptr;
    for (const auto& c : parent.children)
      if (c.is_main) main = &c;
    const Subtask& last = parent.children.back();
    if (main && main != &last && !last.necessary_for_parent) {
      std::string form = last.omission_form.empty()
                             ? "step '" + (last.description.empty() ? last.id : last.description) +
                                   "' is omitted"
                             : last.omission_form;
      Prediction p = make(ModeId::kPostCompletion, last.id, last.location_ref, form);
      p.bindings = {{"Task A", parent.id}, {"Task A.1", main->id}, {"Task A.2", last.id}};
      p.rationale = {
          {"main_subtask", {main->id, parent.id}, main->id + " is the main subtask of " + parent.id, true},
          {"not_necessary", {last.id, main->id}, last.id + " is not necessary for " + main->id, true},
          {"last_step", {last.id, parent.id}, last.id + " is the last step of " + parent.id, true},
      };
      out.push_back(std::move(p));
    }
  }
  for (const auto& c : parent.children) post_completion_visit(c, out);
}

}  // namespace

std::vector<Prediction> check_post_completion(const Subtask& root) {
  std::vector<Prediction> out;
  post_completion_visit(root, out);
  return out;
}

// ---------------------------------------------------------------------------
// Strong-but-now-wrong
// ---------------------------------------------------------------------------

std::vector<Prediction> check_strong_but_wrong(const RuleRequirement& req,
                                               const KnowledgeProfile& kb,
                                               const EngineConfig& cfg,
                                               const std::string& location) {
  std::vector<Prediction> out;
  if (!req.features) return out;
  const FeatureSet& fex = *req.features;
  const std::string where = location.empty() ? req.id : location;

  for (const auto& a : kb.rules) {
    FeatureSet xa = feature_overlap(fex, a.features);
    if (xa.empty()) continue;
    for (const auto& b : kb.rules) {
      if (a.id == b.id) continue;
      FeatureSet xb = feature_overlap(fex, b.features);
      if (!feature_includes(xb, xa)) continue;

      std::vector<RationaleRecord> branches;
      double floor_b = static_cast<double>(std::max<std::int64_t>(b.usage_count, 1));
      if (static_cast<double>(a.usage_count) >= cfg.strength_ratio * floor_b)
        branches.push_back({"far_more", {a.id, b.id},
                            "usage " + std::to_string(a.usage_count) + " of " + a.id + " >= " +
                                format_number(cfg.strength_ratio) + " x max(" +
                                std::to_string(b.usage_count) + ", 1) of " + b.id,
                            true});
      if (b.usage_in_context(fex) == 0)
        branches.push_back({"usage_in_context", {b.id, req.id},
                            b.id + " never used in a context with " + format_features(fex), true});
      if (feature_proper_subset(b.features, a.features))
        branches.push_back({"subset", {b.id, a.id},
                            format_features(b.features) + " ⊂ " + format_features(a.features), true});
      if (branches.empty()) continue;

      std::string name_a = a.manifest.empty() ? a.id : a.manifest;
      std::string name_b = b.manifest.empty() ? b.id : b.manifest;
      std::string form = req.substitution_form.empty() ? "rule {A} applied where rule {B} required"
                                                       : req.substitution_form;
      form = replace_all(replace_all(form, "{A}", name_a), "{B}", name_b);

      Prediction p = make(ModeId::kStrongButWrong, req.id + "/" + a.id + "/" + b.id, where, form);
      p.bindings = {{"Rule X", req.id}, {"Rule A", a.id}, {"Rule B", b.id}};
      p.rationale = {
          {"exists", {a.id}, "rule " + a.id + " exists", true},
          {"exists", {b.id}, "rule " + b.id + " exists", true},
          {"superset", {req.id, b.id, a.id},
           format_features(xb) + " ⊇ " + format_features(xa), true},
          {"not_equal", {req.id, a.id}, format_features(xa) + " ≠ ∅", true},
      };
      p.rationale.insert(p.rationale.end(), branches.begin(), branches.end());
      out.push_back(std::move(p));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rule encoding deficiency
// ---------------------------------------------------------------------------

const Rule* intended_rule(const RuleRequirement& req, const KnowledgeProfile& kb) {
  if (req.rule_id) return kb.find(*req.rule_id);
  if (!req.features) return nullptr;
  const Rule* best = nullptr;
  std::size_t best_n = 0;
  for (const auto& r : kb.rules) {
    std::size_t n = feature_overlap(*req.features, r.complete_features()).size();
    if (n > best_n) {
      best = &r;
      best_n = n;
    }
  }
  return best;
}

std::vector<Prediction> check_encoding_deficiency(const RuleRequirement& req,
                                                  const KnowledgeProfile& kb,
                                                  const std::string& location) {
  const Rule* x = intended_rule(req, kb);
  if (!x) throw MissingRule("no rule in profile '" + kb.profile_id + "' is intended for " + req.describe());
  const std::string where = location.empty() ? req.id : location;

  FeatureSet fex = req.rule_id ? x->complete_features() : *req.features;
  FeatureSet missing = feature_difference(fex, x->effective_features());

  std::vector<Prediction> out;
  for (const auto& f : missing) {
    const SubRule* sub = nullptr;
    for (const auto& sr : x->subrules)
      if (sr.id == f) sub = &sr;
    std::string form;
    std::string why;
    if (sub) {
      form = sub->deficiency_form.empty() ? "rule " + x->id + " applied without sub-rule '" + f + "'"
                                          : sub->deficiency_form;
      why = "sub-rule " + f + " of " + x->id + " is " +
            (sub->encoded ? "encoded but not integrated" : "not encoded");
    } else {
      form = "rule " + x->id + " applied without feature '" + f + "'";
      why = "feature " + f + " is absent from " + x->id;
    }
    Prediction p = make(ModeId::kEncodingDeficiency, req.id + "/" + f, where, form);
    p.bindings = {{"Rule X", req.id}, {"Rule X̃", x->id}};
    p.rationale = {
        {"exists", {x->id}, "rule " + x->id + " stands in for " + req.describe(), true},
        {"difference", {req.id, x->id, f}, why, true},
    };
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lack of knowledge
// ---------------------------------------------------------------------------

double best_overlap_fraction(const FeatureSet& features, const KnowledgeProfile& kb) {
  if (features.empty()) return 1.0;
  std::size_t best = 0;
  for (const auto& r : kb.rules)
    best = std::max(best, feature_overlap(features, r.effective_features()).size());
  return static_cast<double>(best) / static_cast<double>(features.size());
}

namespace {

// Returns the rationale for a missing requirement, or nothing when satisfied.
std::optional<RationaleRecord> missing_requirement(const RuleRequirement& req,
                                                   const KnowledgeProfile& kb,
                                                   const EngineConfig& cfg) {
  if (req.rule_id) {
    if (kb.find(*req.rule_id)) return std::nullopt;
    return RationaleRecord{"absent", {req.id}, "rule " + *req.rule_id + " is not in the profile", true};
  }
  if (!req.features) return std::nullopt;
  double frac = best_overlap_fraction(*req.features, kb);
  if (frac >= cfg.overlap_threshold) return std::nullopt;
  return RationaleRecord{"absent", {req.id},
                         "best rule covers " + format_number(frac) + " of " +
                             format_features(*req.features) + ", below " +
                             format_number(cfg.overlap_threshold),
                         true};
}

void lack_visit(const Subtask& s, const KnowledgeProfile& kb, const EngineConfig& cfg,
                std::vector<Prediction>& out) {
  if (s.any_of && !s.required_rules.empty()) {
    std::vector<RationaleRecord> why;
    for (const auto& r : s.required_rules)
      if (auto m = missing_requirement(r, kb, cfg)) why.push_back(*m);
    if (why.size() == s.required_rules.size()) {
      std::vector<std::string> alts;
      for (const auto& r : s.required_rules) alts.push_back(r.describe());
      std::string form = s.failure_form.empty()
                             ? "subtask " + s.id + " fails: none of " + join(alts, " or ") + " is known"
                             : s.failure_form;
      Prediction p = make(ModeId::kLackOfKnowledge, s.id, s.location_ref, form);
      p.bindings = {{"Rule X", s.id}};
      p.rationale = std::move(why);
      out.push_back(std::move(p));
    }
  } else {
    for (const auto& r : s.required_rules) {
      auto m = missing_requirement(r, kb, cfg);
      if (!m) continue;
      std::string form = !r.failure_form.empty() ? r.failure_form
                         : !s.failure_form.empty()
                             ? s.failure_form
                             : "subtask " + s.id + " fails: " + r.describe() + " is not known";
      Prediction p = make(ModeId::kLackOfKnowledge, s.id + "/" + r.id, s.location_ref, form);
      p.bindings = {{"Rule X", r.id}};
      p.rationale = {*m};
      out.push_back(std::move(p));
    }
  }
  for (const auto& c : s.children) lack_visit(c, kb, cfg, out);
}

}  // namespace

std::vector<Prediction> check_lack_of_knowledge(const TaskModel& task, const KnowledgeProfile& kb,
                                                const EngineConfig& cfg) {
  std::vector<Prediction> out;
  lack_visit(task.root, kb, cfg, out);
  return out;
}

// ---------------------------------------------------------------------------
// Exponential developments
// ---------------------------------------------------------------------------

namespace {

bool grows_nonlinearly(RelationFamily f) {
  return f == RelationFamily::kPower || f == RelationFamily::kExponential ||
         f == RelationFamily::kAffineExponential;
}

std::string linear_model_text(const RelationSpec& rel, double slope) {
  return rel.y_name + "=" + format_number(slope) + rel.x_name;
}

}  // namespace

std::optional<LinearTrap> linear_trap(const RelationSpec& rel, int depth, const EngineConfig& cfg) {
  if (depth < 1 || depth > static_cast<int>(rel.samples.size())) return std::nullopt;
  double sxx = 0;
  double sxy = 0;
  double max_x = rel.samples.front().x;
  for (int k = 0; k < depth; ++k) {
    const Sample& s = rel.samples[k];
    sxx += s.x * s.x;
    sxy += s.x * s.y;
    max_x = std::max(max_x, s.x);
  }
  if (sxx == 0)
    throw DegenerateSamples("relation " + rel.id + ": every x in the first " +
                            std::to_string(depth) + " sample(s) is zero");
  double a = sxy / sxx;
  for (int k = 0; k < depth; ++k)
    if (std::fabs(a * rel.samples[k].x - rel.samples[k].y) > cfg.fit_tolerance) return std::nullopt;

  std::vector<double> beyond;
  if (rel.domain) {
    for (int x = rel.domain->first; x <= rel.domain->second; ++x)
      if (x > max_x) beyond.push_back(x);
  } else {
    for (std::size_t k = depth; k < rel.samples.size(); ++k) beyond.push_back(rel.samples[k].x);
  }
  for (double x : beyond)
    if (std::fabs(a * x - rel.evaluate(x)) > cfg.fit_tolerance) return LinearTrap{depth, a, x};
  return std::nullopt;
}

std::vector<Prediction> check_exponential_difficulty(const RelationSpec& rel,
                                                     const EngineConfig& cfg) {
  std::vector<Prediction> out;
  if (!grows_nonlinearly(rel.true_family)) return out;
  for (int k = 1; k < static_cast<int>(rel.samples.size()); ++k) {
    bool all_zero = true;
    for (int j = 0; j < k; ++j) all_zero = all_zero && rel.samples[j].x == 0;
    if (all_zero)
      throw DegenerateSamples("relation " + rel.id + ": every x in the first " +
                              std::to_string(k) + " sample(s) is zero");
  }
  for (int k : cfg.depths_for(static_cast<int>(rel.samples.size()))) {
    auto trap = linear_trap(rel, k, cfg);
    if (!trap) continue;
    std::string wrong = linear_model_text(rel, trap->slope);
    std::string subject = rel.description.empty() ? rel.y_name + " and " + rel.x_name : rel.description;
    std::string form = "The relationship between " + subject + " is modeled wrongly as " + wrong +
                       ", instead of " + rel.render_true_model();
    Prediction p = make(ModeId::kExponentialDifficulty, rel.id + "/" + std::to_string(k),
                        rel.location_ref, form);
    p.bindings = {{"Relation R", rel.id}};
    double truth = rel.evaluate(trap->divergent_x);
    p.rationale = {
        {"exponential_family", {rel.id},
         rel.render_true_model() + " is " + to_string(rel.true_family), true},
        {"linear_fit_escapes_review",
         {rel.id, std::to_string(k), format_number(trap->slope), format_number(trap->divergent_x)},
         wrong + " reproduces the first " + std::to_string(k) + " sample(s) but gives " +
             format_number(trap->slope * trap->divergent_x) + " instead of " + format_number(truth) +
             " at " + rel.x_name + "=" + format_number(trap->divergent_x),
         true},
    };
    out.push_back(std::move(p));
  }
  // Depths that land on the same wrong model share one prediction.
  std::vector<Prediction> unique;
  for (auto& p : out) {
    auto same = std::find_if(unique.begin(), unique.end(), [&](const Prediction& q) {
      return q.defect_form == p.defect_form;
    });
    if (same == unique.end()) unique.push_back(std::move(p));
    else same->rationale.push_back(p.rationale.back());
  }
  return unique;
}

// ---------------------------------------------------------------------------
// Selectivity
// ---------------------------------------------------------------------------

std::vector<Prediction> check_selectivity(const std::vector<InfoItem>& items) {
  std::vector<Prediction> out;
  for (const auto& i : items) {
    for (const auto& j : items) {
      if (!(j.saliency > i.saliency && i.logic_importance > j.logic_importance)) continue;
      std::string form = i.omission_form.empty()
                             ? "information item '" + i.id + "' is omitted"
                             : i.omission_form;
      Prediction p = make(ModeId::kSelectivity, i.id, i.defect_location(), form);
      p.bindings = {{"FeT_i", i.id}, {"FeT_j", j.id}};
      p.rationale = {
          {"greater", {"saliency", j.id, i.id},
           "saliency " + std::to_string(j.saliency) + " of " + j.id + " > " +
               std::to_string(i.saliency) + " of " + i.id,
           true},
          {"greater", {"logic_importance", i.id, j.id},
           "logic importance " + std::to_string(i.logic_importance) + " of " + i.id + " > " +
               std::to_string(j.logic_importance) + " of " + j.id,
           true},
      };
      out.push_back(std::move(p));
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Biased review
// ---------------------------------------------------------------------------

std::vector<Prediction> check_biased_review(const ReviewSpec& review, const EngineConfig& cfg) {
  std::vector<Prediction> out;
  int n = review.n_conditions;
  if (n < 2) return out;
  for (int k : cfg.depths_for(n)) {
    std::vector<std::string> unverified;
    for (int j = k; j < n && j < static_cast<int>(review.condition_refs.size()); ++j)
      unverified.push_back(review.condition_refs[j]);
    std::string form = "self-review checks only the first " + std::to_string(k) + " of " +
                       std::to_string(n) + " conditions; unverified: " + join(unverified, ", ");
    Prediction p = make(ModeId::kBiasedReview, review.id + "/" + std::to_string(k),
                        review.location_ref, form);
    p.bindings = {{"Work X", review.id}};
    p.rationale = {
        {"condition_count", {review.id, std::to_string(n)},
         review.id + " has " + std::to_string(n) + " conditions", true},
        {"review_subset", {review.id, std::to_string(k)},
         "review depth " + std::to_string(k) + " < " + std::to_string(n), true},
    };
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whole analysis
// ---------------------------------------------------------------------------

namespace {

int mode_rank(ModeId m) { return static_cast<int>(m); }

void merge_into(Prediction& into, const Prediction& from) {
  for (ModeId m : from.mode_ids)
    if (std::find(into.mode_ids.begin(), into.mode_ids.end(), m) == into.mode_ids.end())
      into.mode_ids.push_back(m);
  std::sort(into.mode_ids.begin(), into.mode_ids.end(),
            [](ModeId a, ModeId b) { return mode_rank(a) < mode_rank(b); });
  for (const auto& r : from.rationale)
    if (std::find(into.rationale.begin(), into.rationale.end(), r) == into.rationale.end())
      into.rationale.push_back(r);
  for (const auto& b : from.bindings) {
    bool known = std::any_of(into.bindings.begin(), into.bindings.end(),
                             [&](const auto& x) { return x.first == b.first; });
    if (!known) into.bindings.push_back(b);
  }
}

void collect_requirements(const Subtask& s,
                          std::vector<std::pair<const Subtask*, const RuleRequirement*>>& out) {
  for (const auto& r : s.required_rules) out.push_back({&s, &r});
  for (const auto& c : s.children) collect_requirements(c, out);
}

}  // namespace

PredictionReport predict_all(const std::vector<ErrorMode>& catalog, const TaskModel& task,
                             const KnowledgeProfile& kb, const EngineConfig& cfg) {
  std::vector<ValidationFinding> findings = validate_task(task);
  auto kb_findings = validate_profile(kb);
  findings.insert(findings.end(), kb_findings.begin(), kb_findings.end());
  for (const auto& msg : cfg.validate()) findings.push_back({"config", msg});
  if (!findings.empty()) throw PreconditionFailed(std::move(findings));

  std::vector<std::pair<const Subtask*, const RuleRequirement*>> reqs;
  collect_requirements(task.root, reqs);

  std::vector<Prediction> all;
  auto add = [&](std::vector<Prediction> ps) {
    for (auto& p : ps) all.push_back(std::move(p));
  };
  bool review_enabled = false;
  bool exponential_enabled = false;
  for (const auto& mode : catalog) {
    switch (mode.mode_id) {
      case ModeId::kStrongButWrong:
        for (auto [s, r] : reqs) add(check_strong_but_wrong(*r, kb, cfg, s->location_ref));
        break;
      case ModeId::kEncodingDeficiency:
        for (auto [s, r] : reqs)
          if (intended_rule(*r, kb)) add(check_encoding_deficiency(*r, kb, s->location_ref));
        break;
      case ModeId::kLackOfKnowledge:
        add(check_lack_of_knowledge(task, kb, cfg));
        break;
      case ModeId::kExponentialDifficulty:
        exponential_enabled = true;
        for (const auto& rel : task.relations) add(check_exponential_difficulty(rel, cfg));
        break;
      case ModeId::kSelectivity:
        add(check_selectivity(task.info_items));
        break;
      case ModeId::kBiasedReview:
        review_enabled = true;
        break;
      case ModeId::kPostCompletion:
        add(check_post_completion(task.root));
        break;
    }
  }

  if (review_enabled && task.review_items) {
    const ReviewSpec& review = *task.review_items;
    const RelationSpec* subject = nullptr;
    for (const auto& rel : task.relations)
      if (rel.id == review.subject_ref) subject = &rel;
    for (auto& p : check_biased_review(review, cfg)) {
      int depth = std::stoi(p.rationale.back().operands[1]);
      Prediction* host = nullptr;
      if (exponential_enabled && subject && depth <= static_cast<int>(subject->samples.size())) {
        for (auto& q : all) {
          if (q.mode_ids.front() != ModeId::kExponentialDifficulty) continue;
          for (const auto& r : q.rationale)
            if (r.primitive == "linear_fit_escapes_review" && r.operands[0] == subject->id &&
                r.operands[1] == std::to_string(depth))
              host = &q;
        }
      }
      if (host) merge_into(*host, p);
      else all.push_back(std::move(p));
    }
  }

  std::stable_sort(all.begin(), all.end(), [](const Prediction& a, const Prediction& b) {
    if (a.defect_location != b.defect_location) return a.defect_location < b.defect_location;
    if (a.mode_ids.front() != b.mode_ids.front())
      return mode_rank(a.mode_ids.front()) < mode_rank(b.mode_ids.front());
    if (a.defect_form != b.defect_form) return a.defect_form < b.defect_form;
    return a.prediction_id < b.prediction_id;
  });

  PredictionReport report;
  report.task_id = task.task_id;
  report.profile_id = kb.profile_id;
  report.config = cfg;
  std::map<std::pair<std::string, std::string>, std::size_t> seen;
  for (auto& p : all) {
    auto key = std::make_pair(p.defect_location, p.defect_form);
    auto it = seen.find(key);
    if (it != seen.end()) {
      merge_into(report.predictions[it->second], p);
      continue;
    }
    seen[key] = report.predictions.size();
    report.predictions.push_back(std::move(p));
  }
  for (std::size_t k = 0; k < report.predictions.size(); ++k)
    report.predictions[k].scenario_ref = "ES" + std::to_string(k + 1);
  return report;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

nlohmann::json to_json(const EngineConfig& cfg) {
  nlohmann::json j;
  j["strength_ratio"] = cfg.strength_ratio;
  j["overlap_threshold"] = cfg.overlap_threshold;
  if (cfg.review_depths) j["review_depths"] = *cfg.review_depths;
  else j["review_depths"] = "all";
  j["fit_tolerance"] = cfg.fit_tolerance;
  return j;
}

EngineConfig config_from_json(const nlohmann::json& doc) {
  EngineConfig cfg;
  cfg.strength_ratio = doc.value("strength_ratio", cfg.strength_ratio);
  cfg.overlap_threshold = doc.value("overlap_threshold", cfg.overlap_threshold);
  cfg.fit_tolerance = doc.value("fit_tolerance", cfg.fit_tolerance);
  if (doc.contains("review_depths") && doc["review_depths"].is_array())
    cfg.review_depths = doc["review_depths"].get<std::set<int>>();
  return cfg;
}

nlohmann::json to_json(const PredictionReport& report) {
  nlohmann::json preds = nlohmann::json::array();
  for (const auto& p : report.predictions) {
    nlohmann::json j;
    j["prediction_id"] = p.prediction_id;
    j["scenario_ref"] = p.scenario_ref;
    j["mode_ids"] = nlohmann::json::array();
    for (ModeId m : p.mode_ids) j["mode_ids"].push_back(to_string(m));
    j["defect_location"] = p.defect_location;
    j["defect_form"] = p.defect_form;
    j["bindings"] = nlohmann::json::array();
    for (const auto& [var, id] : p.bindings)
      j["bindings"].push_back({{"variable", var}, {"entity", id}});
    j["rationale"] = nlohmann::json::array();
    for (const auto& r : p.rationale)
      j["rationale"].push_back(
          {{"primitive", r.primitive}, {"operands", r.operands}, {"text", r.text}, {"value", r.value}});
    preds.push_back(std::move(j));
  }
  return {{"task_id", report.task_id},
          {"profile_id", report.profile_id},
          {"config", to_json(report.config)},
          {"predictions", std::move(preds)}};
}

PredictionReport report_from_json(const nlohmann::json& doc) {
  PredictionReport report;
  try {
    report.task_id = doc.value("task_id", "");
    report.profile_id = doc.value("profile_id", "");
    if (doc.contains("config")) report.config = config_from_json(doc.at("config"));
    for (const auto& j : doc.at("predictions")) {
      Prediction p;
      p.prediction_id = j.at("prediction_id").get<std::string>();
      p.scenario_ref = j.value("scenario_ref", "");
      for (const auto& m : j.at("mode_ids")) {
        auto id = mode_from_string(m.get<std::string>());
        if (!id) throw std::runtime_error("unknown mode id '" + m.get<std::string>() + "'");
        p.mode_ids.push_back(*id);
      }
      p.defect_location = j.at("defect_location").get<std::string>();
      p.defect_form = j.at("defect_form").get<std::string>();
      for (const auto& b : j.value("bindings", nlohmann::json::array()))
        p.bindings.emplace_back(b.at("variable").get<std::string>(), b.at("entity").get<std::string>());
      for (const auto& r : j.value("rationale", nlohmann::json::array()))
        p.rationale.push_back({r.at("primitive").get<std::string>(),
                               r.at("operands").get<std::vector<std::string>>(),
                               r.value("text", ""), r.value("value", true)});
      report.predictions.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed prediction report: ") + e.what());
  }
  return report;
}

std::string render_text(const PredictionReport& report) {
  std::ostringstream os;
  os << "Prediction report: task " << report.task_id << ", profile " << report.profile_id << "\n";
  os << report.predictions.size() << " prediction(s)\n";
  for (const auto& p : report.predictions) {
    std::vector<std::string> modes;
    for (ModeId m : p.mode_ids) modes.push_back(to_string(m));
    os << "\n" << p.scenario_ref << "  " << p.prediction_id << "\n";
    os << "  location: " << p.defect_location << "\n";
    os << "  form:     " << p.defect_form << "\n";
    os << "  modes:    " << join(modes, ", ") << "\n";
    os << "  rationale:\n";
    for (const auto& r : p.rationale)
      os << "    " << (r.value ? "[true]  " : "[false] ") << r.primitive << "("
         << join(r.operands, ", ") << "): " << r.text << "\n";
  }
  return os.str();
}

std::string render_csv(const PredictionReport& report) {
  std::string out = csv_row({"scenario_ref", "prediction_id", "defect_location", "mode_ids", "defect_form"});
  for (const auto& p : report.predictions) {
    std::vector<std::string> modes;
    for (ModeId m : p.mode_ids) modes.push_back(to_string(m));
    out += csv_row({p.scenario_ref, p.prediction_id, p.defect_location, join(modes, ";"), p.defect_form});
  }
  return out;
}

}  // namespace hedp
