#include "hedp/defect_corpus.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <map>
#include <utility>

#include "hedp/csv.hpp"
#include "hedp/model_io.hpp"

namespace hedp {

namespace {

constexpr const char* kDefectHeader[] = {"defect_id", "description", "predicted_by"};

bool is_defect_id(const std::string& s) {
  if (s.empty() || s == "N" || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  });
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string join(const std::set<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += ',';
    out += id;
  }
  return out;
}

struct Token {
  std::string text;
  int column;
};

std::vector<Token> split_tokens(const std::string& line, std::size_t from) {
  std::vector<Token> out;
  std::size_t i = from;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    out.push_back({line.substr(i, j - i), static_cast<int>(i) + 1});
    i = j;
  }
  return out;
}

std::vector<std::string> id_list(const std::string& body, int line_no, int column) {
  std::vector<std::string> ids;
  std::size_t start = 0;
  while (true) {
    auto comma = body.find(',', start);
    std::string id = body.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!is_defect_id(id)) throw BadToken(line_no, column, "bad defect id '" + id + "'");
    ids.push_back(id);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return ids;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kAC: return "AC";
    case Verdict::kWA: return "WA";
    case Verdict::kPE: return "PE";
    case Verdict::kRE: return "RE";
    case Verdict::kTL: return "TL";
    case Verdict::kCE: return "CE";
    case Verdict::kUnknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

std::optional<Verdict> verdict_from_string(const std::string& s) {
  for (Verdict v : {Verdict::kAC, Verdict::kWA, Verdict::kPE, Verdict::kRE, Verdict::kTL,
                    Verdict::kCE, Verdict::kUnknown}) {
    if (s == to_string(v)) return v;
  }
  if (s == "REJ") return Verdict::kUnknown;
  return std::nullopt;
}

BadToken::BadToken(int line, int column, const std::string& detail)
    : CorpusError((line > 0 ? "line " + std::to_string(line) + ", " : std::string()) + "column " +
                  std::to_string(column) + ": " + detail),
      line_(line),
      column_(column) {}

DuplicateFix::DuplicateFix(std::string defect_id)
    : CorpusError("defect " + defect_id + " fixed more than once"), id_(std::move(defect_id)) {}

FixBeforeIntroduction::FixBeforeIntroduction(std::string defect_id)
    : CorpusError("defect " + defect_id + " fixed before it was introduced"),
      id_(std::move(defect_id)) {}

UnknownDefect::UnknownDefect(std::string defect_id)
    : CorpusError("unknown defect " + defect_id), id_(std::move(defect_id)) {}

// ---------------------------------------------------------------------------
// DebugHistory
// ---------------------------------------------------------------------------

std::optional<int> DebugHistory::introduced_at(const std::string& defect_id) const {
  bool referenced = false;
  for (const auto& v : versions) {
    if (v.introduced.count(defect_id)) return v.index;
    if (v.fixed.count(defect_id)) referenced = true;
  }
  if (referenced) return 1;
  return std::nullopt;
}

std::optional<int> DebugHistory::fixed_at(const std::string& defect_id) const {
  for (const auto& v : versions) {
    if (v.fixed.count(defect_id)) return v.index;
  }
  return std::nullopt;
}

bool DebugHistory::present_at(const std::string& defect_id, int version) const {
  auto intro = introduced_at(defect_id);
  if (!intro || version < 1 || version > version_count()) return false;
  int fix = fixed_at(defect_id).value_or(INT_MAX);
  return *intro <= version && version < fix;
}

int DebugHistory::versions_present(const std::string& defect_id) const {
  auto intro = introduced_at(defect_id);
  if (!intro) return 0;
  int fix = std::min(fixed_at(defect_id).value_or(INT_MAX), version_count() + 1);
  return std::max(0, fix - *intro);
}

std::set<std::string> DebugHistory::referenced_defects() const {
  std::set<std::string> out;
  for (const auto& v : versions) {
    out.insert(v.introduced.begin(), v.introduced.end());
    out.insert(v.fixed.begin(), v.fixed.end());
  }
  return out;
}

std::set<std::string> DebugHistory::defects_ever_present() const {
  std::set<std::string> out;
  for (const auto& id : referenced_defects()) {
    if (versions_present(id) > 0) out.insert(id);
  }
  return out;
}

std::set<std::string> DebugHistory::unfixed_at_end() const {
  std::set<std::string> out;
  for (const auto& id : referenced_defects()) {
    if (present_at(id, version_count())) out.insert(id);
  }
  return out;
}

bool DebugHistory::accepted() const {
  return !versions.empty() && versions.back().verdict == Verdict::kAC;
}

const DefectRecord* Corpus::find(const std::string& defect_id) const {
  for (const auto& d : defects) {
    if (d.defect_id == defect_id) return &d;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// History grammar
// ---------------------------------------------------------------------------

DebugHistory parse_history_line(const std::string& raw, int line_no) {
  std::string line = raw.substr(0, raw.find('#'));
  auto bar = line.find('|');
  if (bar == std::string::npos) {
    auto first = line.find_first_not_of(" \t");
    throw BadToken(line_no, static_cast<int>(first == std::string::npos ? 0 : first) + 1,
                   "expected 'programmer_id |'");
  }
  DebugHistory h;
  h.programmer_id = trim(line.substr(0, bar));
  if (h.programmer_id.empty() ||
      h.programmer_id.find_first_of(" \t") != std::string::npos) {
    throw BadToken(line_no, 1, "bad programmer id '" + h.programmer_id + "'");
  }

  struct Intro {
    std::string id;
    int version;
    int column;
  };
  std::vector<Intro> intros;
  std::vector<Intro> pending;
  std::optional<Verdict> final_verdict;

  auto tokens = split_tokens(line, bar + 1);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const auto& [text, col] = tokens[t];
    if (text[0] == '!') {
      auto v = verdict_from_string(text.substr(1));
      if (!v || (v == Verdict::kUnknown && text != "!REJ"))
        throw BadToken(line_no, col, "bad verdict '" + text + "'");
      if (t + 1 != tokens.size()) throw BadToken(line_no, col, "verdict must come last");
      final_verdict = v;
      continue;
    }
    if (text[0] == '+') {
      std::string body = text.substr(1);
      int at = 0;
      auto sign = body.find('@');
      if (sign != std::string::npos) {
        std::string num = body.substr(sign + 1);
        if (num.empty() || num.size() > 6 ||
            !std::all_of(num.begin(), num.end(), [](char c) { return c >= '0' && c <= '9'; })) {
          throw BadToken(line_no, col, "bad version in '" + text + "'");
        }
        at = std::stoi(num);
        body = body.substr(0, sign);
      }
      for (auto& id : id_list(body, line_no, col)) {
        (at > 0 ? intros : pending).push_back({id, at, col});
      }
      continue;
    }

    VersionRecord v;
    v.index = h.version_count() + 1;
    std::vector<std::string> fixes;
    if (text == "N") {
    } else if (text[0] == '-') {
      fixes = id_list(text.substr(1), line_no, col);
    } else if (is_defect_id(text)) {
      fixes.push_back(text);
    } else {
      throw BadToken(line_no, col, "unexpected '" + text + "'");
    }
    for (const auto& id : fixes) {
      if (v.fixed.count(id) || h.fixed_at(id)) throw DuplicateFix(id);
      v.fixed.insert(id);
    }
    for (auto& p : pending) {
      p.version = v.index;
      intros.push_back(p);
    }
    pending.clear();
    h.versions.push_back(std::move(v));
  }

  if (!pending.empty()) {
    throw BadToken(line_no, pending.front().column, "introduction with no following version");
  }
  if (h.versions.empty()) {
    throw BadToken(line_no, static_cast<int>(bar) + 2, "history has no versions");
  }
  std::set<std::string> seen;
  for (const auto& in : intros) {
    if (in.version < 1 || in.version > h.version_count()) {
      throw BadToken(line_no, in.column, "version " + std::to_string(in.version) + " out of range");
    }
    if (!seen.insert(in.id).second) {
      throw BadToken(line_no, in.column, "defect " + in.id + " introduced twice");
    }
    auto fix = h.fixed_at(in.id);
    if (fix && *fix <= in.version) throw FixBeforeIntroduction(in.id);
    h.versions[in.version - 1].introduced.insert(in.id);
  }
  if (final_verdict) h.versions.back().verdict = *final_verdict;
  return h;
}

std::string serialize_history(const DebugHistory& h) {
  std::string out = h.programmer_id + " |";
  for (const auto& v : h.versions) {
    if (!v.introduced.empty()) out += " +" + join(v.introduced);
    if (v.fixed.empty()) {
      out += " N";
    } else if (v.fixed.size() == 1) {
      out += " " + *v.fixed.begin();
    } else {
      out += " -" + join(v.fixed);
    }
  }
  if (!h.versions.empty()) {
    Verdict last = h.versions.back().verdict;
    out += last == Verdict::kUnknown ? std::string(" !REJ") : std::string(" !") + to_string(last);
  }
  return out;
}

HistoryFile parse_histories(const std::string& text) {
  HistoryFile out;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    if (body[0] == '@') {
      auto tokens = split_tokens(line, 0);
      if (tokens[0].text != "@participants" || tokens.size() != 2) {
        throw BadToken(line_no, tokens[0].column, "unknown directive '" + tokens[0].text + "'");
      }
      const auto& num = tokens[1].text;
      if (num.size() > 9 ||
          !std::all_of(num.begin(), num.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw BadToken(line_no, tokens[1].column, "bad participant count '" + num + "'");
      }
      out.participants = std::stoi(num);
      continue;
    }
    out.histories.push_back(parse_history_line(line, line_no));
  }
  return out;
}

std::vector<DefectRecord> parse_defect_table(const std::string& text) {
  auto rows = parse_csv(text);
  std::vector<DefectRecord> out;
  bool header = true;
  int line = 0;
  for (const auto& row : rows) {
    ++line;
    if (row.size() == 1 && trim(row[0]).empty()) continue;
    if (header) {
      if (row.size() != 3 || trim(row[0]) != kDefectHeader[0] ||
          trim(row[1]) != kDefectHeader[1] || trim(row[2]) != kDefectHeader[2]) {
        throw CorpusError("record 1: expected header defect_id,description,predicted_by");
      }
      header = false;
      continue;
    }
    if (row.size() != 3) {
      throw CorpusError("record " + std::to_string(line) + ": expected 3 fields, got " +
                        std::to_string(row.size()));
    }
    DefectRecord d;
    d.defect_id = trim(row[0]);
    d.description = row[1];
    std::string pred = trim(row[2]);
    if (!pred.empty()) d.predicted_by = pred;
    out.push_back(std::move(d));
  }
  if (header) throw CorpusError("defect table is empty");
  return out;
}

std::string serialize_defect_table(const std::vector<DefectRecord>& defects) {
  std::string out = csv_row({kDefectHeader[0], kDefectHeader[1], kDefectHeader[2]});
  for (const auto& d : defects) {
    out += csv_row({d.defect_id, d.description, d.predicted_by.value_or("")});
  }
  return out;
}

Corpus make_corpus(std::vector<DefectRecord> defects, const HistoryFile& histories) {
  Corpus c;
  c.defects = std::move(defects);
  c.histories = histories.histories;
  c.participants_total = histories.participants.value_or(static_cast<int>(c.histories.size()));
  return c;
}

Corpus load_corpus(const std::string& defect_table_path, const std::string& history_path) {
  auto with_path = [](const std::string& path, auto&& fn) {
    try {
      return fn(read_text(path));
    } catch (const DocumentError&) {
      throw;
    } catch (const std::exception& e) {
      throw DocumentError(path + ": " + e.what());
    }
  };
  auto defects = with_path(defect_table_path, parse_defect_table);
  auto histories = with_path(history_path, parse_histories);
  return make_corpus(std::move(defects), histories);
}

std::string serialize_histories(const Corpus& corpus) {
  std::string out = "@participants " + std::to_string(corpus.participants_total) + "\n";
  for (const auto& h : corpus.histories) out += serialize_history(h) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

int occurrence(const Corpus& corpus, const std::string& defect_id) {
  if (!corpus.find(defect_id)) throw UnknownDefect(defect_id);
  int n = 0;
  for (const auto& h : corpus.histories) {
    if (h.versions_present(defect_id) > 0) ++n;
  }
  return n;
}

std::set<std::string> coincident_defects(const Corpus& corpus) {
  std::map<std::string, int> counts;
  for (const auto& h : corpus.histories) {
    for (const auto& id : h.defects_ever_present()) ++counts[id];
  }
  std::set<std::string> out;
  for (const auto& d : corpus.defects) {
    if (counts[d.defect_id] >= 2) out.insert(d.defect_id);
  }
  return out;
}

std::vector<ValidationFinding> validate_corpus(const Corpus& corpus) {
  std::vector<ValidationFinding> out;
  std::set<std::string> ids;
  for (const auto& d : corpus.defects) {
    if (!is_defect_id(d.defect_id)) out.push_back({d.defect_id, "malformed defect id"});
    if (!ids.insert(d.defect_id).second) out.push_back({d.defect_id, "duplicate defect id"});
  }
  std::set<std::string> programmers;
  for (const auto& h : corpus.histories) {
    const auto& pid = h.programmer_id;
    if (!programmers.insert(pid).second) out.push_back({pid, "duplicate programmer id"});
    if (h.versions.empty()) out.push_back({pid, "history has no versions"});
    for (std::size_t i = 0; i < h.versions.size(); ++i) {
      const auto& v = h.versions[i];
      if (v.index != static_cast<int>(i) + 1) {
        out.push_back({pid, "version " + std::to_string(i + 1) + " has index " +
                                std::to_string(v.index)});
      }
      for (const auto& id : v.introduced) {
        if (v.fixed.count(id)) {
          out.push_back({pid + "/" + id, "introduced and fixed in the same version"});
        }
      }
    }
    std::map<std::string, int> fixes, intros;
    for (const auto& v : h.versions) {
      for (const auto& id : v.fixed) ++fixes[id];
      for (const auto& id : v.introduced) ++intros[id];
    }
    for (const auto& [id, n] : fixes) {
      if (n > 1) out.push_back({pid + "/" + id, "fixed more than once"});
    }
    for (const auto& [id, n] : intros) {
      if (n > 1) out.push_back({pid + "/" + id, "introduced more than once"});
    }
    for (const auto& id : h.referenced_defects()) {
      if (!ids.count(id)) out.push_back({pid + "/" + id, "unknown defect " + id});
      auto fix = h.fixed_at(id);
      auto intro = h.introduced_at(id);
      if (fix && intro && *fix <= *intro && !(*intro == 1 && intros[id] == 0)) {
        out.push_back({pid + "/" + id, "fixed before it was introduced"});
      }
    }
  }
  if (corpus.participants_total < static_cast<int>(corpus.histories.size())) {
    out.push_back({"participants", "participants_total " +
                                       std::to_string(corpus.participants_total) +
                                       " is less than the " +
                                       std::to_string(corpus.histories.size()) + " histories"});
  }
  return out;
}

}  // namespace hedp
