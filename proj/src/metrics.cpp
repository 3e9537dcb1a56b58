#include "hedp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "hedp/csv.hpp"

namespace hedp {

using nlohmann::json;

namespace {

double pct(long long num, long long den) { return 100.0 * static_cast<double>(num) / den; }

double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::set<std::string> scope_defects(const Corpus& corpus, Scope scope) {
  if (scope == Scope::kCoincident) return coincident_defects(corpus);
  std::set<std::string> out;
  for (const auto& d : corpus.defects) out.insert(d.defect_id);
  return out;
}

const char* scope_name(Scope s) { return s == Scope::kAll ? "all" : "coincident"; }

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string percent(double v, int decimals = 1) { return fixed(v, decimals) + "%"; }

std::string percent(const std::optional<double>& v, int decimals = 1) {
  return v ? percent(*v, decimals) : "N/A";
}

std::string ratio(const std::optional<double>& v) { return v ? fixed(*v, 2) : "N/A"; }

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

/// Left-aligned text table with a header rule.
std::string text_table(const std::string& title, const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  auto measure = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  };
  measure(header);
  for (const auto& r : rows) measure(r);
  auto line = [&](const std::vector<std::string>& r) {
    std::string out;
    for (std::size_t i = 0; i < r.size(); ++i) {
      out += r[i];
      if (i + 1 < r.size()) out += std::string(width[i] - r[i].size() + 2, ' ');
    }
    return out + "\n";
  };
  std::string out = title + "\n" + line(header);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  out += std::string(total - 2, '-') + "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::string out = csv_row(header);
  for (const auto& r : rows) out += csv_row(r);
  return out;
}

struct Table {
  std::string name;
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Category {
  int present;
  int predicted;
  int count = 0;
  std::optional<double> coverage;
  int false_positives;
  double fdr;
  double fnr;
};

std::vector<Category> categories(const PerProgrammerSummary& s) {
  std::map<std::pair<int, int>, Category> by;
  for (const auto& p : s.programmers) {
    auto key = std::make_pair(p.present, -p.true_positives);
    auto it = by.find(key);
    if (it == by.end()) {
      it = by.emplace(key, Category{p.present, p.true_positives, 0, p.coverage, p.false_positives,
                                    p.fdr, p.fnr})
               .first;
    }
    ++it->second.count;
  }
  std::vector<Category> out;
  for (auto& [k, c] : by) out.push_back(c);
  return out;
}

std::vector<Table> tables(const MetricsReport& r) {
  std::vector<Table> out;

  Table defects{"defects", "Defects", {"defect_id", "occurrence", "rate", "coincident", "predicted_by"}, {}};
  for (const auto& d : r.defects) {
    defects.rows.push_back({d.defect_id, std::to_string(d.occurrence), percent(d.rate_of_occurrence),
                            d.coincident ? "yes" : "no", d.predicted_by.value_or("no")});
  }
  out.push_back(defects);

  out.push_back({"coverage_unique",
                 "Coverage of unique defects",
                 {"predicted", "coincident", "total", "coverage_coincident", "coverage_total"},
                 {{std::to_string(r.predicted_count), std::to_string(r.coincident_count),
                   std::to_string(r.defects.size()), percent(r.coverage_unique_coincident),
                   percent(r.coverage_unique_total)}}});

  out.push_back({"coverage_occurrences",
                 "Coverage of defect occurrences",
                 {"predicted_occurrences", "coincident_occurrences", "total_occurrences",
                  "coverage_coincident", "coverage_total"},
                 {{std::to_string(r.predicted_occurrences), std::to_string(r.coincident_occurrences),
                   std::to_string(r.occurrence_total), percent(r.coverage_occurrences_coincident),
                   percent(r.coverage_occurrences_total)}}});

  Table pers{"persistence",
             "Persistence of all defects",
             {"defect_id", "occurrence", "versions_present", "min", "max", "mean"},
             {}};
  for (const auto& p : r.persistence) {
    if (p.occurrence == 0) {
      pers.rows.push_back({p.defect_id, "0", "0", "N/A", "N/A", "N/A"});
    } else {
      pers.rows.push_back({p.defect_id, std::to_string(p.occurrence),
                           std::to_string(p.versions_present), fixed(p.min, 2), fixed(p.max, 2),
                           fixed(p.mean, 2)});
    }
  }
  out.push_back(pers);

  Table appd{"predicted_persistence",
             "Persistence of predicted defects",
             {"defect_id", "degree_of_persistence", "appd", "non_predicted_mean"},
             {}};
  bool first = true;
  for (const auto& p : r.persistence) {
    if (!p.predicted) continue;
    appd.rows.push_back({p.defect_id, p.occurrence ? fixed(p.mean, 2) : "N/A",
                         first ? ratio(r.appd) : "", first ? ratio(r.non_predicted_mean) : ""});
    first = false;
  }
  out.push_back(appd);

  const auto& s = r.per_programmer;
  Table cats{"per_programmer",
             "Predicted defects per programmer",
             {"programmers", "coverage", "present", "present_and_predicted", "predicted", "fp",
              "fdr", "fnr"},
             {}};
  for (const auto& c : categories(s)) {
    auto cov = c.coverage ? std::optional<double>(100 * *c.coverage) : std::nullopt;
    cats.rows.push_back({std::to_string(c.count), percent(cov, 0), std::to_string(c.present),
                         std::to_string(c.predicted), std::to_string(r.prediction_count),
                         std::to_string(c.false_positives), percent(100 * c.fdr, 2),
                         percent(100 * c.fnr, 2)});
  }
  auto avg_cov = s.coverage_per_programmer
                     ? std::optional<double>(100 * *s.coverage_per_programmer)
                     : std::nullopt;
  cats.rows.push_back({"avg", percent(avg_cov, 0),
                       fixed(s.avg_defects_present, 2), fixed(s.avg_true_positives, 2),
                       fixed(r.prediction_count, 2), fixed(s.avg_false_positives, 2),
                       percent(100 * s.avg_fdr, 0), percent(100 * s.avg_fnr, 0)});
  out.push_back(cats);

  Table effort{"debugging_effort", "Saving of debugging effort", {"programmer_id", "sde"}, {}};
  for (const auto& [pid, v] : r.sde) effort.rows.push_back({pid, percent(100 * v)});
  if (r.asde) {
    effort.rows.push_back({"mean", percent(100 * r.asde->mean)});
    effort.rows.push_back({"min", percent(100 * r.asde->min)});
    effort.rows.push_back({"max", percent(100 * r.asde->max)});
    effort.rows.push_back({"sd", percent(100 * r.asde->sd)});
  }
  out.push_back(effort);

  if (r.acceptance) {
    const auto& a = *r.acceptance;
    out.push_back({"acceptance",
                   "Acceptance rate of programmers with defects",
                   {"programmers", "accepted", "rate", "accepted_if_predicted_removed",
                    "rate_if_predicted_removed"},
                   {{std::to_string(a.programmers), std::to_string(a.accepted_now),
                     percent(100 * a.rate_now), std::to_string(a.accepted_if_predicted_removed),
                     percent(100 * a.rate_if_predicted_removed)}}});
  }
  return out;
}

}  // namespace

bool MatchMap::predicted(const std::string& defect_id) const {
  auto it = pairs.find(defect_id);
  return it != pairs.end() && it->second.has_value();
}

std::set<std::string> MatchMap::predicted_set() const {
  std::set<std::string> out;
  for (const auto& [id, ref] : pairs) {
    if (ref) out.insert(id);
  }
  return out;
}

MatchMap match_predictions(const Corpus& corpus, const PredictionReport& report) {
  MatchMap m;
  m.prediction_count = static_cast<int>(report.predictions.size());
  for (const auto& d : corpus.defects) {
    std::optional<std::string> ref;
    if (d.predicted_by) {
      const Prediction* p = report.find(*d.predicted_by);
      if (!p) {
        throw CorpusError("defect " + d.defect_id + ": predicted_by '" + *d.predicted_by +
                          "' is not in the prediction report");
      }
      ref = p->prediction_id;
    }
    m.pairs[d.defect_id] = ref;
  }
  return m;
}

MatchMap match_from_table(const Corpus& corpus) {
  MatchMap m;
  std::set<std::string> refs;
  for (const auto& d : corpus.defects) {
    m.pairs[d.defect_id] = d.predicted_by;
    if (d.predicted_by) refs.insert(*d.predicted_by);
  }
  m.prediction_count = static_cast<int>(refs.size());
  return m;
}

double rate_of_occurrence(const Corpus& corpus, const std::string& defect_id) {
  if (corpus.participants_total <= 0) throw CorpusError("participants_total must be positive");
  return pct(occurrence(corpus, defect_id), corpus.participants_total);
}

double coverage_unique(const MatchMap& matches, const Corpus& corpus, Scope scope) {
  auto in_scope = scope_defects(corpus, scope);
  if (in_scope.empty()) throw EmptyScope(std::string("no defects in scope ") + scope_name(scope));
  long long hit = 0;
  for (const auto& id : in_scope) hit += matches.predicted(id);
  return pct(hit, static_cast<long long>(in_scope.size()));
}

double coverage_occurrences(const MatchMap& matches, const Corpus& corpus, Scope scope) {
  long long hit = 0, total = 0;
  for (const auto& id : scope_defects(corpus, scope)) {
    int n = occurrence(corpus, id);
    total += n;
    if (matches.predicted(id)) hit += n;
  }
  if (total == 0) throw EmptyScope(std::string("no occurrences in scope ") + scope_name(scope));
  return pct(hit, total);
}

double persistence(const DebugHistory& history, const std::string& defect_id) {
  int present = history.versions_present(defect_id);
  if (present == 0) {
    throw DefectNotPresent("defect " + defect_id + " never present for " + history.programmer_id);
  }
  int from = *history.introduced_at(defect_id);
  return static_cast<double>(present) / (history.version_count() - from + 1);
}

double degree_of_persistence(const Corpus& corpus, const std::string& defect_id) {
  if (!corpus.find(defect_id)) throw UnknownDefect(defect_id);
  std::vector<double> ps;
  for (const auto& h : corpus.histories) {
    if (h.versions_present(defect_id) > 0) ps.push_back(persistence(h, defect_id));
  }
  if (ps.empty()) throw DefectNotPresent("defect " + defect_id + " occurs in no history");
  return mean(ps);
}

double appd(const Corpus& corpus, const std::set<std::string>& defects) {
  if (defects.empty()) throw EmptyScope("no defects to average");
  std::vector<double> dps;
  for (const auto& id : defects) dps.push_back(degree_of_persistence(corpus, id));
  return mean(dps);
}

double non_predicted_persistence(const Corpus& corpus, const MatchMap& matches) {
  std::set<std::string> rest;
  for (const auto& d : corpus.defects) {
    if (!matches.predicted(d.defect_id) && occurrence(corpus, d.defect_id) > 0) {
      rest.insert(d.defect_id);
    }
  }
  return appd(corpus, rest);
}

PerProgrammerSummary per_programmer_stats(const MatchMap& matches, const Corpus& corpus) {
  PerProgrammerSummary s;
  const int p = matches.prediction_count;
  auto make = [&](const std::string& pid, const std::set<std::string>& present) {
    ProgrammerStats st;
    st.programmer_id = pid;
    st.present = static_cast<int>(present.size());
    for (const auto& id : present) (matches.predicted(id) ? st.true_positives : st.false_negatives)++;
    st.false_positives = std::max(0, p - st.true_positives);
    if (st.present > 0) st.coverage = static_cast<double>(st.true_positives) / st.present;
    int alarms = st.false_positives + st.true_positives;
    st.fdr = alarms ? static_cast<double>(st.false_positives) / alarms : 0.0;
    st.fnr = st.present ? static_cast<double>(st.false_negatives) / st.present : 0.0;
    return st;
  };
  for (const auto& h : corpus.histories) {
    s.programmers.push_back(make(h.programmer_id, h.defects_ever_present()));
  }
  for (int i = static_cast<int>(corpus.histories.size()); i < corpus.participants_total; ++i) {
    s.programmers.push_back(make("(no history " + std::to_string(i + 1) + ")", {}));
  }
  if (s.programmers.empty()) return s;

  std::vector<double> cov, fdr, fnr, present, tp, fp;
  for (const auto& st : s.programmers) {
    if (st.coverage) cov.push_back(*st.coverage);
    fdr.push_back(st.fdr);
    fnr.push_back(st.fnr);
    present.push_back(st.present);
    tp.push_back(st.true_positives);
    fp.push_back(st.false_positives);
  }
  if (!cov.empty()) s.coverage_per_programmer = mean(cov);
  s.avg_fdr = mean(fdr);
  s.avg_fnr = mean(fnr);
  s.avg_defects_present = mean(present);
  s.avg_true_positives = mean(tp);
  s.avg_false_positives = mean(fp);
  return s;
}

double sde(const DebugHistory& history, const MatchMap& matches) {
  auto present = history.defects_ever_present();
  if (present.empty()) {
    throw DefectNotPresent("programmer " + history.programmer_id + " has no defects");
  }
  const int v_n = history.version_count();
  if (v_n == 1) {
    bool all = std::all_of(present.begin(), present.end(),
                           [&](const std::string& id) { return matches.predicted(id); });
    return all ? 1.0 : 0.0;
  }
  int saved = 0;
  for (const auto& ver : history.versions) {
    if (ver.fixed.empty()) continue;
    bool all_predicted = true;
    int earliest = 1;
    for (const auto& id : ver.fixed) {
      all_predicted = all_predicted && matches.predicted(id);
      earliest = std::max(earliest, *history.introduced_at(id));
    }
    if (!all_predicted) continue;
    // Fixing versions are never themselves counted.
    for (int v = ver.index - 1; v >= earliest && history.versions[v - 1].fixed.empty(); --v) {
      ++saved;
    }
  }
  return static_cast<double>(saved) / v_n;
}

AsdeSummary asde(const Corpus& corpus, const MatchMap& matches) {
  std::vector<double> xs;
  for (const auto& h : corpus.histories) {
    if (!h.defects_ever_present().empty()) xs.push_back(sde(h, matches));
  }
  if (xs.empty()) throw EmptyScope("no programmer introduced a defect");
  AsdeSummary s;
  s.programmers = static_cast<int>(xs.size());
  s.mean = mean(xs);
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  if (xs.size() > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

AcceptanceUplift acceptance_uplift(const Corpus& corpus, const MatchMap& matches) {
  AcceptanceUplift a;
  for (const auto& h : corpus.histories) {
    if (h.defects_ever_present().empty()) continue;
    ++a.programmers;
    if (h.accepted()) {
      ++a.accepted_now;
      ++a.accepted_if_predicted_removed;
      continue;
    }
    auto left = h.unfixed_at_end();
    if (!left.empty() && std::all_of(left.begin(), left.end(), [&](const std::string& id) {
          return matches.predicted(id);
        })) {
      ++a.accepted_if_predicted_removed;
    }
  }
  if (a.programmers == 0) throw EmptyScope("no programmer introduced a defect");
  a.rate_now = static_cast<double>(a.accepted_now) / a.programmers;
  a.rate_if_predicted_removed = static_cast<double>(a.accepted_if_predicted_removed) / a.programmers;
  return a;
}

MetricsReport evaluate(const Corpus& corpus, const MatchMap& matches) {
  MetricsReport r;
  r.participants = corpus.participants_total;
  r.prediction_count = matches.prediction_count;
  auto coincident = coincident_defects(corpus);
  for (const auto& d : corpus.defects) {
    DefectRow row;
    row.defect_id = d.defect_id;
    row.description = d.description;
    row.occurrence = occurrence(corpus, d.defect_id);
    row.rate_of_occurrence =
        corpus.participants_total > 0 ? rate_of_occurrence(corpus, d.defect_id) : 0.0;
    row.coincident = coincident.count(d.defect_id) > 0;
    auto it = matches.pairs.find(d.defect_id);
    if (it != matches.pairs.end()) row.predicted_by = it->second;
    bool hit = row.predicted_by.has_value();

    r.occurrence_total += row.occurrence;
    r.predicted_count += hit;
    r.predicted_occurrences += hit ? row.occurrence : 0;
    if (row.coincident) {
      ++r.coincident_count;
      r.coincident_occurrences += row.occurrence;
      r.predicted_coincident_count += hit;
      r.predicted_coincident_occurrences += hit ? row.occurrence : 0;
    }

    PersistenceRow p;
    p.defect_id = d.defect_id;
    p.occurrence = row.occurrence;
    p.predicted = hit;
    std::vector<double> ps;
    for (const auto& h : corpus.histories) {
      int vr = h.versions_present(d.defect_id);
      if (vr == 0) continue;
      p.versions_present += vr;
      ps.push_back(persistence(h, d.defect_id));
    }
    if (!ps.empty()) {
      p.min = *std::min_element(ps.begin(), ps.end());
      p.max = *std::max_element(ps.begin(), ps.end());
      p.mean = mean(ps);
    }
    r.iterations_total += p.versions_present;
    if (hit) r.iterations_predicted += p.versions_present;
    r.persistence.push_back(p);
    r.defects.push_back(std::move(row));
  }

  auto attempt = [](auto&& fn) -> std::optional<double> {
    try {
      return fn();
    } catch (const EmptyScope&) {
      return std::nullopt;
    } catch (const DefectNotPresent&) {
      return std::nullopt;
    }
  };
  r.coverage_unique_total = attempt([&] { return coverage_unique(matches, corpus, Scope::kAll); });
  r.coverage_unique_coincident =
      attempt([&] { return coverage_unique(matches, corpus, Scope::kCoincident); });
  r.coverage_occurrences_total =
      attempt([&] { return coverage_occurrences(matches, corpus, Scope::kAll); });
  r.coverage_occurrences_coincident =
      attempt([&] { return coverage_occurrences(matches, corpus, Scope::kCoincident); });
  r.appd = attempt([&] { return appd(corpus, matches.predicted_set()); });
  r.non_predicted_mean = attempt([&] { return non_predicted_persistence(corpus, matches); });

  r.per_programmer = per_programmer_stats(matches, corpus);
  for (const auto& h : corpus.histories) {
    if (!h.defects_ever_present().empty()) r.sde.emplace_back(h.programmer_id, sde(h, matches));
  }
  try {
    r.asde = asde(corpus, matches);
    r.acceptance = acceptance_uplift(corpus, matches);
  } catch (const EmptyScope&) {
  }
  return r;
}

json to_json(const MetricsReport& r) {
  json defects = json::array();
  for (const auto& d : r.defects) {
    defects.push_back({{"defect_id", d.defect_id},
                       {"description", d.description},
                       {"occurrence", d.occurrence},
                       {"rate_of_occurrence", d.rate_of_occurrence},
                       {"coincident", d.coincident},
                       {"predicted_by", d.predicted_by ? json(*d.predicted_by) : json(nullptr)}});
  }
  json pers = json::array();
  for (const auto& p : r.persistence) {
    json row = {{"defect_id", p.defect_id},
                {"occurrence", p.occurrence},
                {"versions_present", p.versions_present},
                {"predicted", p.predicted}};
    if (p.occurrence > 0) {
      row["min"] = p.min;
      row["max"] = p.max;
      row["mean"] = p.mean;
    } else {
      row["min"] = row["max"] = row["mean"] = nullptr;
    }
    pers.push_back(row);
  }
  json programmers = json::array();
  for (const auto& p : r.per_programmer.programmers) {
    programmers.push_back({{"programmer_id", p.programmer_id},
                           {"present", p.present},
                           {"true_positives", p.true_positives},
                           {"false_negatives", p.false_negatives},
                           {"false_positives", p.false_positives},
                           {"coverage", opt(p.coverage)},
                           {"fdr", p.fdr},
                           {"fnr", p.fnr}});
  }
  json sde = json::array();
  for (const auto& [pid, v] : r.sde) sde.push_back({{"programmer_id", pid}, {"sde", v}});

  json doc = {
      {"participants", r.participants},
      {"prediction_count", r.prediction_count},
      {"defects", defects},
      {"occurrence_total", r.occurrence_total},
      {"coincident_count", r.coincident_count},
      {"coincident_occurrences", r.coincident_occurrences},
      {"predicted_count", r.predicted_count},
      {"predicted_coincident_count", r.predicted_coincident_count},
      {"predicted_occurrences", r.predicted_occurrences},
      {"predicted_coincident_occurrences", r.predicted_coincident_occurrences},
      {"coverage_unique_total", opt(r.coverage_unique_total)},
      {"coverage_unique_coincident", opt(r.coverage_unique_coincident)},
      {"coverage_occurrences_total", opt(r.coverage_occurrences_total)},
      {"coverage_occurrences_coincident", opt(r.coverage_occurrences_coincident)},
      {"persistence", pers},
      {"appd", opt(r.appd)},
      {"non_predicted_mean", opt(r.non_predicted_mean)},
      {"iterations_predicted", r.iterations_predicted},
      {"iterations_total", r.iterations_total},
      {"per_programmer", programmers},
      {"coverage_per_programmer", opt(r.per_programmer.coverage_per_programmer)},
      {"avg_fdr", r.per_programmer.avg_fdr},
      {"avg_fnr", r.per_programmer.avg_fnr},
      {"avg_defects_present", r.per_programmer.avg_defects_present},
      {"sde", sde},
  };
  if (r.asde) {
    doc["asde"] = {{"mean", r.asde->mean},
                   {"min", r.asde->min},
                   {"max", r.asde->max},
                   {"sd", r.asde->sd},
                   {"programmers", r.asde->programmers}};
  } else {
    doc["asde"] = nullptr;
  }
  if (r.acceptance) {
    const auto& a = *r.acceptance;
    doc["acceptance"] = {{"programmers", a.programmers},
                         {"accepted_now", a.accepted_now},
                         {"accepted_if_predicted_removed", a.accepted_if_predicted_removed},
                         {"acceptance_rate", a.rate_now},
                         {"acceptance_uplift", a.rate_if_predicted_removed}};
  } else {
    doc["acceptance"] = nullptr;
  }
  return doc;
}

std::string render_tables(const MetricsReport& report) {
  std::string out;
  for (const auto& t : tables(report)) {
    if (!out.empty()) out += "\n";
    out += text_table(t.title, t.header, t.rows);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> render_csv_tables(const MetricsReport& report) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& t : tables(report)) out.emplace_back(t.name, csv_table(t.header, t.rows));
  return out;
}

}  // namespace hedp
