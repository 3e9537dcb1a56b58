#include <cmath>
#include <numeric>

#include "doctest.h"
#include "hedp/epsa_engine.hpp"
#include "hedp/metrics.hpp"
#include "hedp/model_io.hpp"
#include "oracles.hpp"

using namespace hedp;

namespace {

Corpus jiong() {
  return load_corpus(test::data_path("jiong.corpus"), test::data_path("jiong.history"));
}

Corpus categories() {
  return load_corpus(test::data_path("jiong.corpus"), test::data_path("programmer_categories.history"));
}

std::vector<DefectRecord> defects(int n) {
  std::vector<DefectRecord> out;
  for (int i = 1; i <= n; ++i) out.push_back({"F" + std::to_string(i), "", {}});
  return out;
}

MatchMap matching(const Corpus& c, const std::set<std::string>& predicted, int prediction_count = -1) {
  MatchMap m;
  for (const auto& d : c.defects)
    m.pairs[d.defect_id] = predicted.count(d.defect_id) ? std::optional<std::string>("p:" + d.defect_id)
                                                         : std::nullopt;
  m.prediction_count = prediction_count < 0 ? static_cast<int>(predicted.size()) : prediction_count;
  return m;
}

double round1(double pct) { return std::round(pct * 10) / 10; }

const std::set<std::string> kAll4 = {"F1", "F2", "F3", "F4"};

}  // namespace

// ---------------------------------------------------------------------------
// Occurrence and coverage
// ---------------------------------------------------------------------------

TEST_CASE("rate of occurrence") {
  Corpus c = jiong();
  CHECK(round1(rate_of_occurrence(c, "F1")) == doctest::Approx(12.7));
  CHECK(round1(rate_of_occurrence(c, "F2")) == doctest::Approx(41.8));
  CHECK_THROWS_AS(rate_of_occurrence(c, "F99"), UnknownDefect);
  Corpus empty_hist;
  empty_hist.defects = defects(1);
  empty_hist.participants_total = 4;
  CHECK(rate_of_occurrence(empty_hist, "F1") == 0);
}

TEST_CASE("coverage on the jiong corpus") {
  Corpus c = jiong();
  MatchMap m = match_from_table(c);
  CHECK(m.prediction_count == 7);
  CHECK(m.predicted_set() == std::set<std::string>{"F1", "F2", "F6", "F7", "F17", "F18", "F21"});
  CHECK(round1(coverage_unique(m, c, Scope::kAll)) == doctest::Approx(31.8));
  CHECK(round1(coverage_unique(m, c, Scope::kCoincident)) == doctest::Approx(77.8));
  CHECK(round1(coverage_occurrences(m, c, Scope::kAll)) == doctest::Approx(75.7));
  CHECK(round1(coverage_occurrences(m, c, Scope::kCoincident)) == doctest::Approx(93.0));
  MatchMap none = matching(c, {});
  CHECK(coverage_unique(none, c, Scope::kAll) == 0);
}

TEST_CASE("coverage scope errors") {
  Corpus c;
  c.defects = defects(2);
  c.histories = parse_histories("A | N F1\n").histories;
  MatchMap m = matching(c, {"F1"});
  CHECK_THROWS_AS(coverage_unique(m, c, Scope::kCoincident), EmptyScope);
  CHECK_THROWS_AS(coverage_occurrences(m, c, Scope::kCoincident), EmptyScope);
  CHECK(coverage_occurrences(m, c, Scope::kAll) == 100);
}

TEST_CASE("matching against the engine's report") {
  auto report = predict_all(builtin_catalog(), load_task(test::data_path("jiong.task")),
                            load_profile(test::data_path("novice_c.profile")), EngineConfig{});
  Corpus c = jiong();
  MatchMap m = match_predictions(c, report);
  CHECK(m.prediction_count == 7);
  CHECK(m.pairs.at("F2") == "post_completion:A5");
  CHECK_FALSE(m.pairs.at("F9").has_value());

  c.defects[2].predicted_by = "ES8";
  CHECK_THROWS_AS(match_predictions(c, report), CorpusError);
  c.defects[2].predicted_by = "ES7";
  CHECK(match_predictions(c, report).pairs.at(c.defects[2].defect_id) == "post_completion:A5");
}

TEST_CASE("coverage grows with the match set") {
  for (int trial = 0; trial < 300; ++trial) {
    Corpus c;
    c.defects = defects(4);
    int n = test::uniform(1, 6);
    for (int i = 0; i < n; ++i) c.histories.push_back(test::random_history(test::uniform(1, 5)));
    auto small = test::random_subset(kAll4, 0.4);
    auto large = small;
    for (const auto& x : test::random_subset(kAll4, 0.4)) large.insert(x);
    for (Scope s : {Scope::kAll, Scope::kCoincident}) {
      try {
        double a = coverage_unique(matching(c, small), c, s);
        double b = coverage_unique(matching(c, large), c, s);
        CHECK(a <= b);
        CHECK(b <= 100);
        CHECK(coverage_occurrences(matching(c, small), c, s) <=
              coverage_occurrences(matching(c, large), c, s));
      } catch (const EmptyScope&) {
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

TEST_CASE("persistence examples") {
  CHECK(persistence(parse_history_line("P | +F9@3 N N N N F9 N"), "F9") == 0.5);
  CHECK(persistence(parse_history_line("P | N F15 F2 N N F6 !AC"), "F6") == doctest::Approx(5.0 / 6));
  CHECK(persistence(parse_history_line("P | +F1 N N N"), "F1") == 1.0);
  CHECK_THROWS_AS(persistence(parse_history_line("P | N F1"), "F2"), DefectNotPresent);

  Corpus c;
  c.defects = defects(1);
  c.histories = parse_histories("A | N F1\nB | +F1 N N\n").histories;
  CHECK(degree_of_persistence(c, "F1") == 0.75);
  CHECK(appd(c, {"F1"}) == 0.75);
  CHECK_THROWS_AS(appd(c, {}), EmptyScope);
}

TEST_CASE("average persistence over listed per-defect means") {
  const double predicted[] = {0.50, 0.63, 0.83, 0.75, 1.00, 0.97, 0.88};
  const double others[] = {0.09, 0.25, 0.75, 0.17, 0.19, 0.75, 0.5, 0.72,
                           1.00, 0.67, 0.17, 0.17, 0.5, 0.33, 0.5};
  double p = std::accumulate(std::begin(predicted), std::end(predicted), 0.0) / 7;
  double o = std::accumulate(std::begin(others), std::end(others), 0.0) / 15;
  CHECK(std::fabs(p - 0.79) <= 0.005);
  CHECK(std::fabs(o - 0.45) <= 0.005);

  Corpus c = jiong();
  MatchMap m = match_from_table(c);
  CHECK(std::fabs(appd(c, m.predicted_set()) - 0.79) <= 0.005);
  CHECK(std::fabs(non_predicted_persistence(c, m) - 0.45) <= 0.005);
}

TEST_CASE("per-defect persistence rows of the jiong corpus") {
  struct Row {
    const char* id;
    int occ, total;
    double min, max, mean;
  };
  const Row rows[] = {
      {"F1", 7, 33, .17, .67, .50},  {"F2", 23, 98, .17, 1, .63},   {"F3", 1, 1, .09, .09, .09},
      {"F4", 1, 1, .25, .25, .25},   {"F5", 1, 3, .75, .75, .75},   {"F6", 14, 73, .33, 1, .83},
      {"F7", 3, 36, .25, 1, .75},    {"F8", 1, 1, .17, .17, .17},   {"F9", 2, 5, .17, .22, .19},
      {"F10", 2, 2, .5, 1, .75},     {"F11", 1, 1, .5, .5, .5},     {"F12", 1, 18, .72, .72, .72},
      {"F13", 1, 4, 1, 1, 1},        {"F14", 1, 2, .67, .67, .67},  {"F15", 1, 1, .17, .17, .17},
      {"F16", 1, 1, .17, .17, .17},  {"F17", 2, 2, 1, 1, 1},        {"F18", 2, 23, .94, 1, .97},
      {"F19", 1, 1, .5, .5, .5},     {"F20", 1, 1, .33, .33, .33},  {"F21", 2, 27, .76, 1, .88},
      {"F22", 1, 1, .5, .5, .5},
  };
  MetricsReport r = evaluate(jiong(), match_from_table(jiong()));
  REQUIRE(r.persistence.size() == 22);
  for (std::size_t k = 0; k < 22; ++k) {
    const auto& got = r.persistence[k];
    CAPTURE(got.defect_id);
    CHECK(got.defect_id == rows[k].id);
    CHECK(got.occurrence == rows[k].occ);
    CHECK(got.versions_present == rows[k].total);
    CHECK(std::fabs(got.min - rows[k].min) <= 0.005 + 1e-12);
    CHECK(std::fabs(got.max - rows[k].max) <= 0.005 + 1e-12);
    CHECK(std::fabs(got.mean - rows[k].mean) <= 0.01);
  }
  CHECK(r.iterations_predicted == 292);
  CHECK(r.iterations_total == 335);
}

TEST_CASE("appd equals an independent summation") {
  Corpus c = jiong();
  for (int trial = 0; trial < 50; ++trial) {
    std::set<std::string> set;
    for (const auto& d : c.defects)
      if (occurrence(c, d.defect_id) > 0 && test::coin(0.4)) set.insert(d.defect_id);
    if (set.empty()) continue;
    double total = 0;
    for (const auto& id : set) {
      double sum = 0;
      int n = 0;
      for (const auto& h : c.histories) {
        int vr = 0, first = 0;
        for (int v = 1; v <= h.version_count(); ++v)
          if (h.present_at(id, v)) {
            ++vr;
            if (!first) first = v;
          }
        if (!vr) continue;
        sum += static_cast<double>(vr) / (h.version_count() - first + 1);
        ++n;
      }
      total += sum / n;
    }
    CHECK(std::fabs(appd(c, set) - total / static_cast<double>(set.size())) <= 1e-9);
  }
}

TEST_CASE("persistence stays in (0, 1]") {
  for (int trial = 0; trial < 500; ++trial) {
    DebugHistory h = test::random_history(test::uniform(1, 6));
    for (const auto& d : h.defects_ever_present()) {
      double p = persistence(h, d);
      CHECK(p > 0);
      CHECK(p <= 1);
    }
  }
}

// ---------------------------------------------------------------------------
// Per-programmer rates
// ---------------------------------------------------------------------------

TEST_CASE("per-programmer rates on the category fixture") {
  Corpus c = categories();
  CHECK(validate_corpus(c).empty());
  PerProgrammerSummary s = per_programmer_stats(match_from_table(c), c);
  CHECK(s.programmers.size() == 55);
  REQUIRE(s.coverage_per_programmer.has_value());
  CHECK(std::fabs(*s.coverage_per_programmer - 0.75) <= 0.01);
  CHECK(std::fabs(s.avg_fdr - 0.86) <= 0.01);
  CHECK(std::fabs(s.avg_fnr - 0.17) <= 0.01);
  CHECK(std::fabs(s.avg_defects_present - 1.25) <= 0.01);

  // Rows by (present, true positives).
  std::map<std::pair<int, int>, int> counts;
  for (const auto& p : s.programmers) {
    ++counts[{p.present, p.true_positives}];
    CHECK(p.false_positives == 7 - p.true_positives);
    if (p.present == 5 && p.true_positives == 4) {
      CHECK(p.fdr == doctest::Approx(3.0 / 7));
      CHECK(p.fnr == doctest::Approx(0.2));
    }
    if (p.present == 0) {
      CHECK(p.fdr == 1);
      CHECK(p.fnr == 0);
      CHECK_FALSE(p.coverage.has_value());
    }
  }
  const std::map<std::pair<int, int>, int> want = {
      {{0, 0}, 18}, {{1, 1}, 13}, {{2, 2}, 8}, {{3, 3}, 2}, {{5, 4}, 2},
      {{3, 2}, 3},  {{5, 3}, 1},  {{2, 1}, 1}, {{1, 0}, 6}, {{2, 0}, 1}};
  CHECK(counts == want);
}

TEST_CASE("per-programmer edge cases") {
  Corpus c;
  c.defects = defects(2);
  c.participants_total = 3;
  auto s = per_programmer_stats(matching(c, {"F1"}, 7), c);
  CHECK(s.programmers.size() == 3);
  CHECK_FALSE(s.coverage_per_programmer.has_value());
  CHECK(s.avg_fdr == 1);
  CHECK(s.avg_fnr == 0);

  c.histories = parse_histories("A | N -F1,F2\n").histories;
  c.participants_total = 1;
  s = per_programmer_stats(matching(c, {"F1"}, 7), c);
  CHECK(s.programmers[0].true_positives == 1);
  CHECK(s.programmers[0].false_negatives == 1);
  CHECK(*s.coverage_per_programmer == 0.5);

  s = per_programmer_stats(matching(c, {}, 0), c);
  CHECK(s.avg_fdr == 0);
}

// ---------------------------------------------------------------------------
// Debugging effort
// ---------------------------------------------------------------------------

TEST_CASE("saving of debugging effort examples") {
  Corpus c;
  c.defects = defects(22);
  auto fig = parse_history_line("P07 | N F15 F2 N N F6 !AC");
  CHECK(sde(fig, matching(c, {"F2", "F6"})) == doctest::Approx(2.0 / 6));
  CHECK(sde(parse_history_line("P | +F1,F2 N !REJ"), matching(c, {"F1", "F2"})) == 1);
  CHECK(sde(parse_history_line("P | +F1,F2 N !REJ"), matching(c, {"F1"})) == 0);
  CHECK_THROWS_AS(sde(parse_history_line("P | N !AC"), matching(c, {})), DefectNotPresent);
  // A fix shared with an unpredicted defect saves nothing.
  CHECK(sde(parse_history_line("P | N N -F1,F2"), matching(c, {"F1"})) == 0);
  CHECK(sde(parse_history_line("P | N N -F1,F2"), matching(c, {"F1", "F2"})) == doctest::Approx(2.0 / 3));
  // Versions before a late introduction are not saved by preventing it.
  CHECK(sde(parse_history_line("P | N +F1 N N F1"), matching(c, {"F1"})) == doctest::Approx(2.0 / 4));
}

TEST_CASE("saving of debugging effort matches a brute-force oracle") {
  Corpus c;
  c.defects = defects(4);
  for (int trial = 0; trial < 2000; ++trial) {
    DebugHistory h = test::random_history(5);
    auto pred = test::random_subset(kAll4, 0.5);
    CAPTURE(serialize_history(h));
    CHECK(sde(h, matching(c, pred)) == doctest::Approx(test::sde_oracle(h, pred)).epsilon(1e-12));
  }
  for (int trial = 0; trial < 200; ++trial) {
    DebugHistory h = test::random_history(1);
    auto pred = test::random_subset(kAll4, 0.5);
    CHECK(sde(h, matching(c, pred)) == test::sde_oracle(h, pred));
  }
}

TEST_CASE("saving of debugging effort shrinks with the match set and stays in range") {
  Corpus c;
  c.defects = defects(4);
  for (int trial = 0; trial < 1000; ++trial) {
    DebugHistory h = test::random_history(test::uniform(1, 7));
    auto large = test::random_subset(kAll4, 0.7);
    auto small = test::random_subset(large, 0.6);
    double a = sde(h, matching(c, large));
    double b = sde(h, matching(c, small));
    CHECK(b <= a);
    CHECK(a >= 0);
    CHECK(a <= 1);
  }
}

TEST_CASE("average saving") {
  Corpus c;
  c.defects = defects(2);
  // 1 of 5 and 3 of 5 versions saved.
  c.histories = parse_histories("A | N F2 N F1 N\nB | N N N F1 F2 !AC\nC | N !AC\n").histories;
  auto s = asde(c, matching(c, {"F1"}));
  CHECK(s.programmers == 2);
  CHECK(s.mean == doctest::Approx(0.4));
  CHECK(s.min == doctest::Approx(0.2));
  CHECK(s.max == doctest::Approx(0.6));
  CHECK(s.sd == doctest::Approx(std::sqrt(0.08)));

  Corpus clean;
  clean.defects = defects(1);
  clean.histories = parse_histories("A | N !AC\n").histories;
  CHECK_THROWS_AS(asde(clean, matching(clean, {"F1"})), EmptyScope);
  CHECK_THROWS_AS(acceptance_uplift(clean, matching(clean, {"F1"})), EmptyScope);
}

TEST_CASE("acceptance uplift") {
  Corpus c;
  c.defects = defects(2);
  c.histories = parse_histories("A | N F1 !AC\nB | +F2 N !REJ\n").histories;
  auto u = acceptance_uplift(c, matching(c, {"F2"}));
  CHECK(u.programmers == 2);
  CHECK(u.rate_now == 0.5);
  CHECK(u.rate_if_predicted_removed == 1);
  CHECK(acceptance_uplift(c, matching(c, {"F1"})).rate_if_predicted_removed == 0.5);

  c.histories = parse_histories("A | N F1 !AC\nB | N F2 !AC\n").histories;
  u = acceptance_uplift(c, matching(c, {}));
  CHECK(u.rate_now == 1);
  CHECK(u.rate_if_predicted_removed == 1);
}

TEST_CASE("whole-corpus report") {
  Corpus c = jiong();
  MetricsReport r = evaluate(c, match_from_table(c));
  CHECK(r.participants == 55);
  CHECK(r.occurrence_total == 70);
  CHECK(r.coincident_count == 9);
  CHECK(r.coincident_occurrences == 57);
  CHECK(r.predicted_occurrences == 53);
  REQUIRE(r.acceptance.has_value());
  CHECK(r.acceptance->programmers == 37);
  CHECK(r.acceptance->accepted_now == 22);
  CHECK(r.acceptance->accepted_if_predicted_removed == 35);
  REQUIRE(r.asde.has_value());
  CHECK(r.asde->min == 0);
  CHECK(r.asde->max == 1);

  auto j = to_json(r);
  for (const char* key : {"coverage_unique_total", "coverage_unique_coincident", "coverage_occurrences_total",
                          "coverage_occurrences_coincident", "appd", "non_predicted_mean", "avg_fdr", "asde",
                          "acceptance"})
    CHECK(j.contains(key));
  CHECK(render_tables(r) == render_tables(evaluate(c, match_from_table(c))));
  CHECK(render_csv_tables(r).size() >= 7);
}
