// Generators and brute-force reference implementations shared by the unit
// tests and the acceptance binary. Each oracle is written from the
// definition, not from the library code it checks.
#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hedp/defect_corpus.hpp"
#include "hedp/model.hpp"
#include "support.hpp"

namespace hedp::test {

/// Tree of depth at most 3 with unique ids s0, s1, ...
inline Subtask random_tree(int depth, int& next_id) {
  Subtask s;
  s.id = "s" + std::to_string(next_id++);
  s.necessary_for_parent = coin(0.6);
  if (depth < 3) {
    int n = uniform(0, 4);
    for (int i = 0; i < n; ++i) s.children.push_back(random_tree(depth + 1, next_id));
    if (!s.children.empty() && coin(0.7))
      s.children[uniform(0, static_cast<int>(s.children.size()) - 1)].is_main = true;
  }
  return s;
}

/// Every (parent, main child, trailing child) triple meeting the trigger.
inline void post_completion_oracle(const Subtask& s, std::set<std::string>& out) {
  for (std::size_t m = 0; m < s.children.size(); ++m)
    for (std::size_t l = 0; l < s.children.size(); ++l) {
      bool is_last = l + 1 == s.children.size();
      if (m != l && is_last && s.children[m].is_main && !s.children[l].necessary_for_parent)
        out.insert("post_completion:" + s.children[l].id);
    }
  for (const auto& c : s.children) post_completion_oracle(c, out);
}

inline std::vector<InfoItem> random_items() {
  std::vector<InfoItem> items(uniform(0, 6));
  for (std::size_t k = 0; k < items.size(); ++k) {
    items[k].id = "i" + std::to_string(k);
    items[k].saliency = uniform(0, 10);
    items[k].logic_importance = uniform(0, 10);
  }
  return items;
}

inline std::set<std::string> selectivity_oracle(const std::vector<InfoItem>& items) {
  std::set<std::string> out;
  for (const auto& i : items)
    for (const auto& j : items)
      if (j.saliency > i.saliency && i.logic_importance > j.logic_importance) out.insert("selectivity:" + i.id);
  return out;
}

/// History over F1..F4 with `versions` versions and at least one defect.
inline DebugHistory random_history(int versions) {
  while (true) {
    DebugHistory h;
    h.programmer_id = "P";
    for (int v = 1; v <= versions; ++v) h.versions.push_back({v, Verdict::kUnknown, {}, {}});
    for (int d = 1; d <= 4; ++d) {
      if (!coin(0.5)) continue;
      std::string id = "F" + std::to_string(d);
      int intro = coin(0.6) ? 1 : uniform(1, versions);
      h.versions[intro - 1].introduced.insert(id);
      if (intro < versions && coin(0.8)) h.versions[uniform(intro + 1, versions) - 1].fixed.insert(id);
    }
    if (h.unfixed_at_end().empty()) h.versions.back().verdict = Verdict::kAC;
    if (!h.defects_ever_present().empty()) return h;
  }
}

/// Share of versions that would not have been needed: a version with no fix
/// whose next fixing version repairs only predicted defects, all of them
/// already present in it. A lone version is saved outright when every
/// defect in it is predicted.
inline double sde_oracle(const DebugHistory& h, const std::set<std::string>& predicted) {
  int n = h.version_count();
  if (n == 1) {
    for (const auto& d : h.defects_ever_present())
      if (!predicted.count(d)) return 0;
    return 1;
  }
  int saved = 0;
  for (int v = 1; v <= n; ++v) {
    if (!h.versions[v - 1].fixed.empty()) continue;
    int f = v + 1;
    while (f <= n && h.versions[f - 1].fixed.empty()) ++f;
    if (f > n) continue;
    bool ok = true;
    for (const auto& d : h.versions[f - 1].fixed) ok = ok && predicted.count(d) && h.present_at(d, v);
    if (ok) ++saved;
  }
  return static_cast<double>(saved) / n;
}

inline std::set<std::string> random_subset(const std::set<std::string>& from, double p) {
  std::set<std::string> out;
  for (const auto& x : from)
    if (coin(p)) out.insert(x);
  return out;
}

inline std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (auto at = s.find(from); at != std::string::npos; at = s.find(from, at + to.size()))
    s.replace(at, from.size(), to);
  return s;
}

/// Swaps every Unicode operator for its ASCII alias.
inline std::string to_ascii(std::string s) {
  const std::vector<std::pair<std::string, std::string>> table = {
      {"∩", " INTERSECT "}, {"⊇", " SUPERSET "}, {"⊂", " SUBSET "}, {"≠", " != "},
      {"≫", " >> "},        {"∅", " EMPTY "},    {"−", " MINUS "},
  };
  for (const auto& [u, a] : table) s = replace_all(s, u, a);
  return replace_all(s, "X̃", "X~");
}

}  // namespace hedp::test
