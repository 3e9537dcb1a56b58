#include "hedp/model_io.hpp"

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

namespace hedp {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.is_object() || !obj.contains(key))
    throw DocumentError(ctx + ": missing field '" + key + "'");
  return obj.at(key);
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DocumentError(std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
T get_req(const json& obj, const char* key, const std::string& ctx) {
  try {
    return require(obj, key, ctx).get<T>();
  } catch (const json::exception& e) {
    throw DocumentError(ctx + ": field '" + key + "': " + e.what());
  }
}

FeatureSet features_from(const json& arr, const std::string& ctx) {
  if (!arr.is_array()) throw DocumentError(ctx + ": features must be an array");
  FeatureSet fs;
  for (const auto& f : arr) fs.insert(f.get<std::string>());
  return fs;
}

json features_to(const FeatureSet& fs) {
  json arr = json::array();
  for (const auto& f : fs) arr.push_back(f);
  return arr;
}

RuleRequirement requirement_from(const json& j, const std::string& owner, std::size_t index) {
  RuleRequirement r;
  std::string ctx = "requirement of subtask '" + owner + "'";
  r.id = get_or<std::string>(j, "id", owner + "#" + std::to_string(index + 1));
  if (j.contains("rule_id")) r.rule_id = j.at("rule_id").get<std::string>();
  if (j.contains("features")) r.features = features_from(j.at("features"), ctx);
  r.substitution_form = get_or<std::string>(j, "substitution_form", "");
  r.failure_form = get_or<std::string>(j, "failure_form", "");
  return r;
}

Subtask subtask_from(const json& j) {
  Subtask s;
  s.id = get_req<std::string>(j, "id", "subtask");
  std::string ctx = "subtask '" + s.id + "'";
  s.description = get_or<std::string>(j, "description", "");
  s.is_main = get_or<bool>(j, "is_main", false);
  s.necessary_for_parent = get_or<bool>(j, "necessary_for_parent", true);
  s.any_of = get_or<bool>(j, "any_of", false);
  s.location_ref = get_or<std::string>(j, "location_ref", s.id);
  s.omission_form = get_or<std::string>(j, "omission_form", "");
  s.failure_form = get_or<std::string>(j, "failure_form", "");
  if (j.contains("required_rules")) {
    const auto& reqs = j.at("required_rules");
    for (std::size_t i = 0; i < reqs.size(); ++i)
      s.required_rules.push_back(requirement_from(reqs[i], s.id, i));
  }
  if (j.contains("children"))
    for (const auto& c : j.at("children")) s.children.push_back(subtask_from(c));
  (void)ctx;
  return s;
}

json subtask_to(const Subtask& s) {
  json j;
  j["id"] = s.id;
  j["description"] = s.description;
  j["is_main"] = s.is_main;
  j["necessary_for_parent"] = s.necessary_for_parent;
  j["any_of"] = s.any_of;
  j["location_ref"] = s.location_ref;
  if (!s.omission_form.empty()) j["omission_form"] = s.omission_form;
  if (!s.failure_form.empty()) j["failure_form"] = s.failure_form;
  json reqs = json::array();
  for (const auto& r : s.required_rules) {
    json rj;
    rj["id"] = r.id;
    if (r.rule_id) rj["rule_id"] = *r.rule_id;
    if (r.features) rj["features"] = features_to(*r.features);
    if (!r.substitution_form.empty()) rj["substitution_form"] = r.substitution_form;
    if (!r.failure_form.empty()) rj["failure_form"] = r.failure_form;
    reqs.push_back(rj);
  }
  j["required_rules"] = reqs;
  json kids = json::array();
  for (const auto& c : s.children) kids.push_back(subtask_to(c));
  j["children"] = kids;
  return j;
}

}  // namespace

TaskModel task_from_json(const json& doc) {
  TaskModel t;
  try {
    t.task_id = get_req<std::string>(doc, "task_id", "task");
    if (doc.contains("spec_lines"))
      for (const auto& l : doc.at("spec_lines"))
        t.spec_lines.push_back({get_req<std::string>(l, "line_id", "spec line"),
                                get_or<std::string>(l, "text", "")});
    t.root = subtask_from(require(doc, "root", "task"));
    if (doc.contains("info_items"))
      for (const auto& i : doc.at("info_items")) {
        InfoItem item;
        item.id = get_req<std::string>(i, "id", "info item");
        std::string ctx = "info item '" + item.id + "'";
        item.location_ref = get_req<std::string>(i, "location_ref", ctx);
        item.saliency = get_req<int>(i, "saliency", ctx);
        item.logic_importance = get_req<int>(i, "logic_importance", ctx);
        item.content = get_or<std::string>(i, "content", "");
        item.omission_form = get_or<std::string>(i, "omission_form", "");
        item.manifests_at = get_or<std::string>(i, "manifests_at", "");
        t.info_items.push_back(std::move(item));
      }
    if (doc.contains("relations"))
      for (const auto& r : doc.at("relations")) {
        RelationSpec rel;
        rel.id = get_req<std::string>(r, "id", "relation");
        std::string ctx = "relation '" + rel.id + "'";
        for (const auto& s : require(r, "samples", ctx)) {
          if (!s.is_array() || s.size() != 2)
            throw DocumentError(ctx + ": each sample must be an [x, y] pair");
          rel.samples.push_back({s[0].get<double>(), s[1].get<double>()});
        }
        auto fam = get_req<std::string>(r, "true_family", ctx);
        auto parsed = relation_family_from_string(fam);
        if (!parsed) throw DocumentError(ctx + ": unknown true_family '" + fam + "'");
        rel.true_family = *parsed;
        rel.true_params = get_req<std::vector<double>>(r, "true_params", ctx);
        rel.location_ref = get_req<std::string>(r, "location_ref", ctx);
        rel.x_name = get_or<std::string>(r, "x_name", "x");
        rel.y_name = get_or<std::string>(r, "y_name", "y");
        rel.description = get_or<std::string>(r, "description", "");
        if (r.contains("domain") && !r.at("domain").is_null()) {
          auto d = r.at("domain").get<std::vector<int>>();
          if (d.size() != 2) throw DocumentError(ctx + ": domain must be [lo, hi]");
          rel.domain = std::make_pair(d[0], d[1]);
        }
        t.relations.push_back(std::move(rel));
      }
    if (doc.contains("review_items") && !doc.at("review_items").is_null()) {
      const auto& r = doc.at("review_items");
      ReviewSpec rs;
      rs.id = get_or<std::string>(r, "id", "review");
      rs.n_conditions = get_req<int>(r, "n_conditions", "review_items");
      rs.condition_refs = get_req<std::vector<std::string>>(r, "condition_refs", "review_items");
      rs.location_ref = get_req<std::string>(r, "location_ref", "review_items");
      rs.subject_ref = get_or<std::string>(r, "subject_ref", "");
      t.review_items = std::move(rs);
    }
  } catch (const json::exception& e) {
    throw DocumentError(std::string("task document: ") + e.what());
  }
  return t;
}

json to_json(const TaskModel& t) {
  json doc;
  doc["task_id"] = t.task_id;
  json lines = json::array();
  for (const auto& l : t.spec_lines) lines.push_back({{"line_id", l.line_id}, {"text", l.text}});
  doc["spec_lines"] = lines;
  doc["root"] = subtask_to(t.root);
  json items = json::array();
  for (const auto& i : t.info_items) {
    json j{{"id", i.id},
           {"location_ref", i.location_ref},
           {"saliency", i.saliency},
           {"logic_importance", i.logic_importance},
           {"content", i.content}};
    if (!i.omission_form.empty()) j["omission_form"] = i.omission_form;
    if (!i.manifests_at.empty()) j["manifests_at"] = i.manifests_at;
    items.push_back(j);
  }
  doc["info_items"] = items;
  json rels = json::array();
  for (const auto& r : t.relations) {
    json samples = json::array();
    for (const auto& s : r.samples) samples.push_back({s.x, s.y});
    json j{{"id", r.id},
           {"samples", samples},
           {"true_family", to_string(r.true_family)},
           {"true_params", r.true_params},
           {"location_ref", r.location_ref},
           {"x_name", r.x_name},
           {"y_name", r.y_name},
           {"description", r.description}};
    if (r.domain) j["domain"] = {r.domain->first, r.domain->second};
    rels.push_back(j);
  }
  doc["relations"] = rels;
  if (t.review_items) {
    const auto& r = *t.review_items;
    doc["review_items"] = {{"id", r.id},
                           {"n_conditions", r.n_conditions},
                           {"condition_refs", r.condition_refs},
                           {"location_ref", r.location_ref},
                           {"subject_ref", r.subject_ref}};
  } else {
    doc["review_items"] = nullptr;
  }
  return doc;
}

KnowledgeProfile profile_from_json(const json& doc) {
  KnowledgeProfile kb;
  try {
    kb.profile_id = get_req<std::string>(doc, "profile_id", "profile");
    kb.provenance = get_or<std::string>(doc, "provenance", "");
    for (const auto& r : require(doc, "rules", "profile")) {
      Rule rule;
      rule.id = get_req<std::string>(r, "id", "rule");
      std::string ctx = "rule '" + rule.id + "'";
      rule.features = features_from(get_or<json>(r, "features", json::array()), ctx);
      rule.usage_count = get_or<std::int64_t>(r, "usage_count", 0);
      rule.manifest = get_or<std::string>(r, "manifest", "");
      auto kind = get_or<std::string>(r, "kind", "specific");
      if (kind != "specific" && kind != "general")
        throw DocumentError(ctx + ": kind must be 'specific' or 'general'");
      rule.kind = kind == "general" ? RuleKind::kGeneral : RuleKind::kSpecific;
      if (r.contains("subrules"))
        for (const auto& s : r.at("subrules"))
          rule.subrules.push_back({get_req<std::string>(s, "id", ctx + " sub-rule"),
                                   get_or<bool>(s, "encoded", true),
                                   get_or<bool>(s, "integrated", true),
                                   get_or<std::string>(s, "deficiency_form", "")});
      if (r.contains("context_usage"))
        for (const auto& [feature, count] : r.at("context_usage").items())
          rule.context_usage.emplace_back(feature, count.get<std::int64_t>());
      kb.rules.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    throw DocumentError(std::string("profile document: ") + e.what());
  }
  return kb;
}

json to_json(const KnowledgeProfile& kb) {
  json rules = json::array();
  for (const auto& r : kb.rules) {
    json subs = json::array();
    for (const auto& s : r.subrules) {
      json sj{{"id", s.id}, {"encoded", s.encoded}, {"integrated", s.integrated}};
      if (!s.deficiency_form.empty()) sj["deficiency_form"] = s.deficiency_form;
      subs.push_back(sj);
    }
    json rj{{"id", r.id},
            {"features", features_to(r.features)},
            {"usage_count", r.usage_count},
            {"subrules", subs},
            {"kind", to_string(r.kind)}};
    if (!r.manifest.empty()) rj["manifest"] = r.manifest;
    if (!r.context_usage.empty()) {
      json cu = json::object();
      for (const auto& [f, c] : r.context_usage) cu[f] = c;
      rj["context_usage"] = cu;
    }
    rules.push_back(rj);
  }
  return {{"profile_id", kb.profile_id}, {"provenance", kb.provenance}, {"rules", rules}};
}

std::string read_text(const std::string& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DocumentError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

json parse_document(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw DocumentError(path + ": " + e.what());
  }
}

}  // namespace

TaskModel load_task(const std::string& path) {
  try {
    return task_from_json(parse_document(path));
  } catch (const DocumentError& e) {
    std::string msg = e.what();
    if (msg.rfind(path, 0) == 0) throw;
    throw DocumentError(path + ": " + msg);
  }
}

KnowledgeProfile load_profile(const std::string& path) {
  try {
    return profile_from_json(parse_document(path));
  } catch (const DocumentError& e) {
    std::string msg = e.what();
    if (msg.rfind(path, 0) == 0) throw;
    throw DocumentError(path + ": " + msg);
  }
}

}  // namespace hedp
