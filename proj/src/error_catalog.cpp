#include "hedp/error_catalog.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace hedp {

namespace {

struct ModeInfo {
  ModeId id;
  const char* key;
  const char* name;
  PerformanceLevel level;
};

const ModeInfo kModes[] = {
    {ModeId::kStrongButWrong, "strong_but_wrong", "Applying strong-but-now-wrong rule",
     PerformanceLevel::kRule},
    {ModeId::kEncodingDeficiency, "encoding_deficiency", "Rule encoding deficiencies",
     PerformanceLevel::kRule},
    {ModeId::kLackOfKnowledge, "lack_of_knowledge", "Lack of knowledge",
     PerformanceLevel::kKnowledge},
    {ModeId::kExponentialDifficulty, "exponential_difficulty",
     "Difficulties with exponential developments", PerformanceLevel::kKnowledge},
    {ModeId::kSelectivity, "selectivity", "Selectivity", PerformanceLevel::kKnowledge},
    {ModeId::kBiasedReview, "biased_review", "Biased review", PerformanceLevel::kKnowledge},
    {ModeId::kPostCompletion, "post_completion", "Post-completion error",
     PerformanceLevel::kSkill},
};

const ModeInfo& info(ModeId id) {
  for (const auto& m : kModes)
    if (m.id == id) return m;
  return kModes[0];
}

}  // namespace

const std::vector<ModeId>& all_modes() {
  static const std::vector<ModeId> modes = [] {
    std::vector<ModeId> out;
    for (const auto& m : kModes) out.push_back(m.id);
    return out;
  }();
  return modes;
}

const char* to_string(ModeId id) { return info(id).key; }

std::optional<ModeId> mode_from_string(const std::string& s) {
  for (const auto& m : kModes)
    if (s == m.key) return m.id;
  return std::nullopt;
}

const char* to_string(PerformanceLevel level) {
  switch (level) {
    case PerformanceLevel::kSkill: return "skill";
    case PerformanceLevel::kRule: return "rule";
    case PerformanceLevel::kKnowledge: return "knowledge";
  }
  return "skill";
}

std::vector<std::string> EngineConfig::validate() const {
  std::vector<std::string> out;
  if (!(std::isfinite(strength_ratio) && strength_ratio > 1))
    out.push_back("strength ratio must be a finite number greater than 1");
  if (!(overlap_threshold > 0 && overlap_threshold <= 1))
    out.push_back("overlap threshold must lie in (0, 1]");
  if (review_depths)
    for (int d : *review_depths)
      if (d < 1) out.push_back("review depths must be positive, got " + std::to_string(d));
  if (!(std::isfinite(fit_tolerance) && fit_tolerance >= 0))
    out.push_back("fit tolerance must be a finite number >= 0");
  return out;
}

std::vector<int> EngineConfig::depths_for(int n) const {
  std::vector<int> out;
  for (int k = 1; k < n; ++k)
    if (!review_depths || review_depths->count(k)) out.push_back(k);
  return out;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

const std::vector<Primitive>& primitive_registry() {
  static const std::vector<Primitive> registry = {
      {"exists", {{"Rule", "Subtask", "InfoItem", "Relation", "Review"}}, "Bool"},
      {"main_subtask", {{"Subtask"}}, "Bool"},
      {"not_necessary", {{"Subtask"}, {"Subtask"}}, "Bool"},
      {"last_step", {{"Subtask"}, {"Subtask"}}, "Bool"},
      {"usage_in_context", {{"Rule"}, {"FeatureSet"}}, "Count"},
      {"absent", {{"Rule"}}, "Bool"},
      {"exponential_family", {{"Relation"}}, "Bool"},
      {"linear_fit_escapes_review", {{"Relation"}}, "Bool"},
      {"condition_count", {{"Review"}}, "Count"},
      {"saliency", {{"InfoItem"}}, "Ordinal"},
      {"logic_importance", {{"InfoItem"}}, "Ordinal"},
      {"retrieve", {{"Rule"}, {"Rule"}}, "Manifestation"},
      {"misuse", {{"Rule"}, {"Rule"}}, "Manifestation"},
      {"fail", {{"Rule"}}, "Manifestation"},
      {"linear_model", {{"Relation"}}, "Manifestation"},
      {"omit", {{"Subtask", "InfoItem"}}, "Manifestation"},
      {"review_subset", {{"Review"}}, "Manifestation"},
      {"intersect", {{"FeatureSet"}, {"FeatureSet"}}, "FeatureSet"},
      {"difference", {{"FeatureSet"}, {"FeatureSet"}}, "FeatureSet"},
      {"subset", {{"FeatureSet"}, {"FeatureSet"}}, "Bool"},
      {"superset", {{"FeatureSet"}, {"FeatureSet"}}, "Bool"},
      {"greater", {{"Count", "Ordinal", "Number"}, {"Count", "Ordinal", "Number"}}, "Bool"},
      {"less", {{"Count", "Ordinal", "Number"}, {"Count", "Ordinal", "Number"}}, "Bool"},
      {"far_more", {{"Count", "Number"}, {"Count", "Number"}}, "Bool"},
      {"equal", {}, "Bool"},
      {"not_equal", {}, "Bool"},
  };
  return registry;
}

const Primitive* find_primitive(const std::string& name) {
  for (const auto& p : primitive_registry())
    if (p.name == name) return &p;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

namespace {

// Source lines of each scenario, split at terminating periods.
std::vector<std::string> scenario_sources(const std::string& source) {
  std::vector<std::string> lines;
  std::istringstream in(source);
  for (std::string line; std::getline(in, line);) lines.push_back(line);

  std::vector<std::string> out;
  std::optional<int> first;
  for (const auto& tok : dsl::tokenize(source)) {
    if (!first) first = tok.position.line;
    if (tok.kind != dsl::TokenKind::kPeriod) continue;
    std::string chunk;
    for (int l = *first; l <= tok.position.line && l <= static_cast<int>(lines.size()); ++l)
      chunk += lines[l - 1] + "\n";
    out.push_back(chunk);
    first.reset();
  }
  return out;
}

}  // namespace

std::vector<ErrorMode> load_catalog(const std::string& source) {
  std::vector<dsl::ScenarioAST> asts = dsl::parse_scenarios(source);
  std::vector<std::string> sources = scenario_sources(source);
  std::vector<ErrorMode> out;
  for (std::size_t k = 0; k < asts.size(); ++k) {
    auto& ast = asts[k];
    if (ast.scenario_id.empty())
      throw CatalogError("scenario " + std::to_string(k + 1) + " has no [mode_id] label");
    auto id = mode_from_string(ast.scenario_id);
    if (!id) throw CatalogError("unknown mode id '" + ast.scenario_id + "'");
    for (const auto& m : out)
      if (m.mode_id == *id) throw CatalogError("duplicate mode id '" + ast.scenario_id + "'");
    const ModeInfo& mi = info(*id);
    std::string text = k < sources.size() ? sources[k] : dsl::render_scenario(ast);
    out.push_back({*id, mi.name, std::move(text), std::move(ast), mi.level});
  }
  return out;
}

std::vector<ErrorMode> merge_catalogs(std::vector<ErrorMode> base,
                                      const std::vector<ErrorMode>& extra) {
  for (const auto& m : extra) {
    for (const auto& b : base)
      if (b.mode_id == m.mode_id)
        throw CatalogError(std::string("duplicate mode id '") + to_string(m.mode_id) + "'");
    base.push_back(m);
  }
  return base;
}

const std::vector<ErrorMode>& builtin_catalog() {
  static const std::vector<ErrorMode> catalog = [] {
    auto modes = load_catalog(builtin_catalog_source());
    std::stable_sort(modes.begin(), modes.end(), [](const ErrorMode& a, const ErrorMode& b) {
      return static_cast<int>(a.mode_id) < static_cast<int>(b.mode_id);
    });
    return modes;
  }();
  return catalog;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

bool numeric(const std::string& t) { return t == "Count" || t == "Ordinal" || t == "Number"; }

class TypeChecker {
 public:
  TypeChecker(const ErrorMode& mode, std::vector<ValidationFinding>& out)
      : mode_(mode), out_(out) {
    for (const auto& v : mode.ast.free_variables) domains_[v.name] = v.domain;
  }

  std::string type_of(const dsl::Expr& e) {
    using dsl::ExprKind;
    switch (e.kind) {
      case ExprKind::kVariable: {
        auto it = domains_.find(e.name);
        std::string d = it != domains_.end() ? it->second : dsl::infer_domain(e.name);
        if (d.empty()) report("variable '" + e.name + "' has no binding domain");
        return d;
      }
      case ExprKind::kNumber:
        return "Number";
      case ExprKind::kEmptySet:
        return "FeatureSet";
      case ExprKind::kGroup:
        return type_of(e.args.front());
      case ExprKind::kSet:
        for (const auto& a : e.args) type_of(a);
        return "Set";
      case ExprKind::kCall:
        return call_type(e);
      case ExprKind::kBinary:
      case ExprKind::kChain:
        return operator_type(e);
    }
    return "";
  }

  void report(const std::string& msg) {
    out_.push_back({to_string(mode_.mode_id), msg});
  }

 private:
  const ErrorMode& mode_;
  std::vector<ValidationFinding>& out_;
  std::map<std::string, std::string> domains_;

  std::string call_type(const dsl::Expr& e) {
    const Primitive* prim = find_primitive(e.name);
    std::vector<std::string> args;
    for (const auto& a : e.args) args.push_back(type_of(a));
    if (!prim) {
      report("call to unregistered primitive '" + e.name + "'");
      return "";
    }
    if (prim->params.size() != args.size()) {
      report("primitive '" + e.name + "' takes " + std::to_string(prim->params.size()) +
             " argument(s), given " + std::to_string(args.size()));
      return prim->result;
    }
    for (std::size_t k = 0; k < args.size(); ++k) {
      const auto& ok = prim->params[k];
      if (!args[k].empty() && std::find(ok.begin(), ok.end(), args[k]) == ok.end())
        report("type mismatch: argument " + std::to_string(k + 1) + " of '" + e.name +
               "' is " + args[k] + ", expected " + ok.front());
    }
    return prim->result;
  }

  std::string operator_type(const dsl::Expr& e) {
    std::vector<std::string> types;
    for (const auto& a : e.args) types.push_back(type_of(a));
    std::string result = e.kind == dsl::ExprKind::kBinary ? "FeatureSet" : "Bool";
    for (std::size_t k = 0; k < e.ops.size(); ++k) {
      const char* name = dsl::primitive_name(e.ops[k]);
      const Primitive* prim = find_primitive(name);
      const std::string& l = types[k];
      const std::string& r = types[k + 1];
      if (!prim) {
        report(std::string("operator '") + dsl::symbol(e.ops[k]) + "' has no primitive");
        continue;
      }
      if (l.empty() || r.empty()) continue;
      bool ok;
      if (prim->params.empty()) {
        ok = l == r || (numeric(l) && numeric(r) && (l == "Number" || r == "Number"));
      } else {
        auto accepts = [](const std::vector<std::string>& v, const std::string& t) {
          return std::find(v.begin(), v.end(), t) != v.end();
        };
        ok = accepts(prim->params[0], l) && accepts(prim->params[1], r) &&
             (!numeric(l) || l == r || l == "Number" || r == "Number");
      }
      if (!ok)
        report(std::string("type mismatch: '") + dsl::symbol(e.ops[k]) + "' applied to " + l +
               " and " + r);
    }
    return result;
  }
};

}  // namespace

std::vector<ValidationFinding> validate_mode(const ErrorMode& mode) {
  std::vector<ValidationFinding> out;
  TypeChecker tc(mode, out);
  for (const auto& v : mode.ast.free_variables)
    if (v.domain.empty()) tc.report("variable '" + v.name + "' has no binding domain");

  for (const dsl::Condition* c : dsl::leaves(mode.ast.trigger_conditions)) {
    auto pred = c->predicate();
    if (!pred) {
      tc.report("condition at " + dsl::to_string(c->position) + " has no predicate");
      continue;
    }
    std::string t = tc.type_of(*pred);
    if (t == "Manifestation")
      tc.report("manifestation '" + pred->name + "' used as a trigger condition");
    else if (!t.empty() && t != "Bool")
      tc.report("condition at " + dsl::to_string(c->position) + " is " + t + ", not a truth value");
  }
  for (const auto& c : mode.ast.consequences) {
    for (const auto& p : c.pieces) {
      if (p.kind != dsl::PieceKind::kExpr) continue;
      std::string t = tc.type_of(p.expr);
      if (!t.empty() && t != "Manifestation")
        tc.report("consequence '" + p.expr.name + "' is not a manifestation primitive");
    }
  }
  if (mode.ast.consequences.empty()) tc.report("scenario has no consequence");
  return out;
}

}  // namespace hedp
