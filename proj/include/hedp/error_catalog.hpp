// The seven built-in error modes, the primitive registry their scenarios are
// checked against, and the engine parameters that give the notation's
// qualitative operators a concrete meaning.
#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hedp/model.hpp"
#include "hedp/scenario_dsl.hpp"

namespace hedp {

enum class ModeId {
  kStrongButWrong,
  kEncodingDeficiency,
  kLackOfKnowledge,
  kExponentialDifficulty,
  kSelectivity,
  kBiasedReview,
  kPostCompletion,
};

/// Catalog order.
const std::vector<ModeId>& all_modes();
const char* to_string(ModeId id);
std::optional<ModeId> mode_from_string(const std::string& s);

enum class PerformanceLevel { kSkill, kRule, kKnowledge };
const char* to_string(PerformanceLevel level);

struct ErrorMode {
  ModeId mode_id = ModeId::kPostCompletion;
  std::string name;
  std::string dsl_source;
  dsl::ScenarioAST ast;
  PerformanceLevel performance_level = PerformanceLevel::kSkill;
};

struct EngineConfig {
  /// θ: `a ≫ b` holds when a ≥ θ·max(b, 1).
  double strength_ratio = 10.0;
  /// τ: minimum fraction of required features a rule must cover to count as
  /// present.
  double overlap_threshold = 1.0;
  /// Prefix lengths a self-review is assumed to check. Unset means every
  /// strict prefix of the sample list.
  std::optional<std::set<int>> review_depths;
  double fit_tolerance = 1e-6;

  /// One message per violated bound; empty when usable.
  std::vector<std::string> validate() const;
  /// Depths to try for a sample list of length n, ascending.
  std::vector<int> depths_for(int n) const;
};

struct Primitive {
  std::string name;
  /// Accepted argument domains, one alternative list per parameter.
  std::vector<std::vector<std::string>> params;
  /// "Bool", "Count", "Ordinal", "FeatureSet" or "Manifestation".
  std::string result;
};

/// Calls and operator names a scenario may reference.
const std::vector<Primitive>& primitive_registry();
const Primitive* find_primitive(const std::string& name);

class CatalogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a `.eps` file. Every scenario needs a `[mode_id]` label naming one
/// of the known modes; a mode may appear once.
std::vector<ErrorMode> load_catalog(const std::string& source);

/// Concatenates catalogs, rejecting any mode id present in both.
std::vector<ErrorMode> merge_catalogs(std::vector<ErrorMode> base,
                                      const std::vector<ErrorMode>& extra);

/// The shipped catalog, in catalog order.
const std::vector<ErrorMode>& builtin_catalog();
const std::string& builtin_catalog_source();

std::vector<ValidationFinding> validate_mode(const ErrorMode& mode);

}  // namespace hedp
