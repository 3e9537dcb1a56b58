// Ground-truth defects and per-programmer debugging histories.
//
// A defect's presence is never stored. It is derived from where the defect
// was introduced (explicitly, or version 1 by default) and where it was
// fixed: present in v iff introduced_at <= v < fixed_at.
#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hedp/model.hpp"

namespace hedp {

struct DefectRecord {
  std::string defect_id;
  std::string description;
  /// Prediction id or scenario ref ("ES3") of the forecast covering it.
  std::optional<std::string> predicted_by;
  bool operator==(const DefectRecord&) const = default;
};

enum class Verdict { kAC, kWA, kPE, kRE, kTL, kCE, kUnknown };
const char* to_string(Verdict v);
std::optional<Verdict> verdict_from_string(const std::string& s);

struct VersionRecord {
  int index = 1;
  Verdict verdict = Verdict::kUnknown;
  /// Explicit introductions only.
  std::set<std::string> introduced;
  std::set<std::string> fixed;
  bool operator==(const VersionRecord&) const = default;
};

struct DebugHistory {
  std::string programmer_id;
  std::vector<VersionRecord> versions;

  int version_count() const { return static_cast<int>(versions.size()); }
  /// Explicit introduction version, else 1 for any referenced defect.
  std::optional<int> introduced_at(const std::string& defect_id) const;
  std::optional<int> fixed_at(const std::string& defect_id) const;
  bool present_at(const std::string& defect_id, int version) const;
  /// Versions in which the defect is present.
  int versions_present(const std::string& defect_id) const;
  /// Every defect named in an introduction or a fix.
  std::set<std::string> referenced_defects() const;
  /// Defects present in at least one version.
  std::set<std::string> defects_ever_present() const;
  /// Defects still present in the final version.
  std::set<std::string> unfixed_at_end() const;
  bool accepted() const;

  bool operator==(const DebugHistory&) const = default;
};

struct Corpus {
  std::vector<DefectRecord> defects;
  std::vector<DebugHistory> histories;
  int participants_total = 0;

  const DefectRecord* find(const std::string& defect_id) const;
  bool operator==(const Corpus&) const = default;
};

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A token outside the history grammar. `line` is 0 for a lone history line;
/// `column` is 1-based.
class BadToken : public CorpusError {
 public:
  BadToken(int line, int column, const std::string& detail);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class DuplicateFix : public CorpusError {
 public:
  explicit DuplicateFix(std::string defect_id);
  const std::string& defect_id() const { return id_; }

 private:
  std::string id_;
};

class FixBeforeIntroduction : public CorpusError {
 public:
  explicit FixBeforeIntroduction(std::string defect_id);
  const std::string& defect_id() const { return id_; }

 private:
  std::string id_;
};

class UnknownDefect : public CorpusError {
 public:
  explicit UnknownDefect(std::string defect_id);
  const std::string& defect_id() const { return id_; }

 private:
  std::string id_;
};

/// `programmer_id | token* [!AC|!REJ]`. Tokens: `N` (no fix), a bare defect
/// id (fix), `-id,id` (fixes), `+id,id[@v]` (introductions at version v,
/// default the next version token). `#` starts a comment.
DebugHistory parse_history_line(const std::string& line, int line_no = 0);
std::string serialize_history(const DebugHistory& history);

struct HistoryFile {
  std::vector<DebugHistory> histories;
  /// From an `@participants N` directive.
  std::optional<int> participants;
};

HistoryFile parse_histories(const std::string& text);

/// CSV with header `defect_id,description,predicted_by`.
std::vector<DefectRecord> parse_defect_table(const std::string& text);
std::string serialize_defect_table(const std::vector<DefectRecord>& defects);

/// Participants default to the number of histories.
Corpus make_corpus(std::vector<DefectRecord> defects, const HistoryFile& histories);
Corpus load_corpus(const std::string& defect_table_path, const std::string& history_path);
/// History file text, including the participants directive.
std::string serialize_histories(const Corpus& corpus);

/// Programmers who had the defect in at least one version.
int occurrence(const Corpus& corpus, const std::string& defect_id);
/// Defects with occurrence >= 2.
std::set<std::string> coincident_defects(const Corpus& corpus);

std::vector<ValidationFinding> validate_corpus(const Corpus& corpus);

}  // namespace hedp
