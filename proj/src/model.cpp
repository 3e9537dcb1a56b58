#include "hedp/model.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <sstream>

namespace hedp {

FeatureSet feature_overlap(const FeatureSet& a, const FeatureSet& b) {
  FeatureSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.end()));
  return out;
}

FeatureSet feature_difference(const FeatureSet& a, const FeatureSet& b) {
  FeatureSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::inserter(out, out.end()));
  return out;
}

bool feature_includes(const FeatureSet& outer, const FeatureSet& inner) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

bool feature_proper_subset(const FeatureSet& inner, const FeatureSet& outer) {
  return inner.size() < outer.size() && feature_includes(outer, inner);
}

std::string format_features(const FeatureSet& fs) {
  std::string out = "{";
  bool first = true;
  for (const auto& f : fs) {
    if (!first) out += ", ";
    out += f;
    first = false;
  }
  return out + "}";
}

FeatureSet Rule::effective_features() const {
  FeatureSet out = features;
  for (const auto& sr : subrules)
    if (!sr.deficient()) out.insert(sr.id);
  return out;
}

FeatureSet Rule::complete_features() const {
  FeatureSet out = features;
  for (const auto& sr : subrules) out.insert(sr.id);
  return out;
}

std::int64_t Rule::usage_in_context(const FeatureSet& context) const {
  std::optional<std::int64_t> least;
  for (const auto& [feature, count] : context_usage) {
    if (!context.count(feature)) continue;
    least = least ? std::min(*least, count) : count;
  }
  return least.value_or(usage_count);
}

const Rule* KnowledgeProfile::find(const std::string& rule_id) const {
  for (const auto& r : rules)
    if (r.id == rule_id) return &r;
  return nullptr;
}

std::string RuleRequirement::describe() const {
  if (rule_id) return "rule " + *rule_id;
  if (features) return "features " + format_features(*features);
  return "unspecified requirement";
}

std::string format_number(double v) {
  if (std::isfinite(v) && v == std::round(v) && std::fabs(v) < 1e15) {
    std::ostringstream os;
    os << static_cast<long long>(v);
    return os.str();
  }
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double RelationSpec::evaluate(double x) const {
  auto param = [&](std::size_t i) {
    return i < true_params.size() ? true_params[i] : 0.0;
  };
  switch (true_family) {
    case RelationFamily::kPower:
      return std::pow(x, param(0));
    case RelationFamily::kExponential:
      return std::pow(param(0), x);
    case RelationFamily::kAffineExponential:
      return std::pow(param(0), x + param(1));
    case RelationFamily::kLinear:
      return param(0) * x;
  }
  return 0;
}

std::string RelationSpec::render_true_model() const {
  auto param = [&](std::size_t i) {
    return format_number(i < true_params.size() ? true_params[i] : 0.0);
  };
  std::string rhs;
  switch (true_family) {
    case RelationFamily::kPower:
      rhs = x_name + "^{" + param(0) + "}";
      break;
    case RelationFamily::kExponential:
      rhs = param(0) + "^{" + x_name + "}";
      break;
    case RelationFamily::kAffineExponential: {
      double c = true_params.size() > 1 ? true_params[1] : 0.0;
      std::string shift = c < 0 ? "-" + format_number(-c) : "+" + format_number(c);
      rhs = param(0) + "^{" + x_name + shift + "}";
      break;
    }
    case RelationFamily::kLinear:
      rhs = param(0) + x_name;
      break;
  }
  return y_name + "=" + rhs;
}

std::vector<std::string> split_location(const std::string& ref) {
  std::vector<std::string> parts;
  std::string cur;
  auto flush = [&] {
    auto b = cur.find_first_not_of(" \t");
    auto e = cur.find_last_not_of(" \t");
    if (b != std::string::npos) parts.push_back(cur.substr(b, e - b + 1));
    cur.clear();
  };
  for (char c : ref) {
    if (c == ',') flush();
    else cur += c;
  }
  flush();
  return parts;
}

bool resolves(const TaskModel& task, const std::string& ref) {
  auto parts = split_location(ref);
  if (parts.empty()) return false;
  std::set<std::string> known;
  for (const auto& l : task.spec_lines) known.insert(l.line_id);
  for_each_subtask(task.root, [&](const Subtask& s) { known.insert(s.id); });
  return std::all_of(parts.begin(), parts.end(),
                     [&](const std::string& p) { return known.count(p) > 0; });
}

std::vector<ValidationFinding> validate_task(const TaskModel& task) {
  std::vector<ValidationFinding> out;
  auto add = [&](std::string where, std::string msg) {
    out.push_back({std::move(where), std::move(msg)});
  };

  std::map<std::string, int> ids;
  for_each_subtask(task.root, [&](const Subtask& s) { ++ids[s.id]; });
  for (const auto& [id, n] : ids)
    if (n > 1) add(id, "subtask id '" + id + "' is not unique");

  std::set<std::string> line_ids;
  for (const auto& l : task.spec_lines)
    if (!line_ids.insert(l.line_id).second)
      add(l.line_id, "spec line id '" + l.line_id + "' is not unique");

  auto check_ref = [&](const std::string& owner, const std::string& ref) {
    if (!resolves(task, ref))
      add(owner, "location_ref '" + ref + "' does not resolve to a spec line or subtask");
  };

  for_each_subtask(task.root, [&](const Subtask& s) {
    if (s.id.empty()) add(s.location_ref, "subtask with empty id");
    check_ref(s.id, s.location_ref);
    std::vector<std::string> mains;
    for (const auto& c : s.children)
      if (c.is_main) mains.push_back(c.id);
    if (mains.size() > 1) {
      std::string names;
      for (const auto& m : mains) names += (names.empty() ? "" : ", ") + m;
      add(s.id, "more than one main child under '" + s.id + "': " + names);
    }
    std::set<std::string> req_ids;
    for (const auto& r : s.required_rules) {
      if (r.rule_id.has_value() == r.features.has_value())
        add(s.id, "requirement '" + r.id + "' must name exactly one of rule_id or features");
      if (r.features && r.features->empty())
        add(s.id, "requirement '" + r.id + "' has an empty feature set");
      if (!req_ids.insert(r.id).second)
        add(s.id, "requirement id '" + r.id + "' is not unique");
    }
  });

  for (const auto& item : task.info_items) {
    check_ref(item.id, item.location_ref);
    if (!item.manifests_at.empty()) check_ref(item.id, item.manifests_at);
    if (item.saliency < 0 || item.saliency > 10)
      add(item.id, "saliency outside [0,10]");
    if (item.logic_importance < 0 || item.logic_importance > 10)
      add(item.id, "logic_importance outside [0,10]");
  }

  for (const auto& rel : task.relations) {
    check_ref(rel.id, rel.location_ref);
    if (rel.samples.size() < 2) add(rel.id, "relation needs at least 2 samples");
    std::size_t arity = rel.true_family == RelationFamily::kAffineExponential ? 2 : 1;
    if (rel.true_params.size() != arity) {
      add(rel.id, std::string("family ") + to_string(rel.true_family) + " takes " +
                      std::to_string(arity) + " parameter(s)");
      continue;
    }
    for (const auto& s : rel.samples) {
      double expect = rel.evaluate(s.x);
      if (!(std::fabs(expect - s.y) <= 1e-9)) {
        std::ostringstream os;
        os << "sample (" << format_number(s.x) << ", " << format_number(s.y)
           << ") inconsistent with true family " << rel.render_true_model()
           << " (expected " << format_number(expect) << ")";
        add(rel.id, os.str());
      }
    }
    if (rel.domain && rel.domain->first > rel.domain->second)
      add(rel.id, "relation domain is empty");
  }

  if (task.review_items) {
    const auto& r = *task.review_items;
    if (r.n_conditions < 1) add(r.id, "review n_conditions must be positive");
    if (static_cast<std::size_t>(std::max(r.n_conditions, 0)) != r.condition_refs.size())
      add(r.id, "review n_conditions does not match the number of condition_refs");
    check_ref(r.id, r.location_ref);
    if (!r.subject_ref.empty()) {
      bool found = std::any_of(task.relations.begin(), task.relations.end(),
                               [&](const RelationSpec& rel) { return rel.id == r.subject_ref; });
      if (!found) add(r.id, "review subject_ref '" + r.subject_ref + "' names no relation");
    }
  }
  return out;
}

std::vector<ValidationFinding> validate_profile(const KnowledgeProfile& kb) {
  std::vector<ValidationFinding> out;
  std::set<std::string> seen;
  for (const auto& r : kb.rules) {
    if (!seen.insert(r.id).second)
      out.push_back({r.id, "rule id '" + r.id + "' is not unique"});
    if (r.usage_count < 0) out.push_back({r.id, "usage_count is negative"});
    for (const auto& [feature, count] : r.context_usage)
      if (count < 0) out.push_back({r.id, "context usage for '" + feature + "' is negative"});
    std::set<std::string> sub_ids;
    for (const auto& sr : r.subrules) {
      if (!sub_ids.insert(sr.id).second)
        out.push_back({r.id, "sub-rule id '" + sr.id + "' is not unique"});
      if (sr.integrated && !sr.encoded)
        out.push_back({r.id, "sub-rule '" + sr.id + "' is integrated but not encoded"});
    }
  }
  return out;
}

const char* to_string(RelationFamily family) {
  switch (family) {
    case RelationFamily::kPower: return "power";
    case RelationFamily::kExponential: return "exponential";
    case RelationFamily::kAffineExponential: return "affine-exponential";
    case RelationFamily::kLinear: return "linear";
  }
  return "linear";
}

std::optional<RelationFamily> relation_family_from_string(const std::string& s) {
  if (s == "power") return RelationFamily::kPower;
  if (s == "exponential") return RelationFamily::kExponential;
  if (s == "affine-exponential") return RelationFamily::kAffineExponential;
  if (s == "linear") return RelationFamily::kLinear;
  return std::nullopt;
}

const char* to_string(RuleKind kind) {
  return kind == RuleKind::kGeneral ? "general" : "specific";
}

}  // namespace hedp
