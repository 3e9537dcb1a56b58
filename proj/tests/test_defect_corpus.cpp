#include <map>

#include "doctest.h"
#include "hedp/defect_corpus.hpp"
#include "hedp/model_io.hpp"
#include "support.hpp"

using namespace hedp;

namespace {

Corpus jiong() {
  return load_corpus(test::data_path("jiong.corpus"), test::data_path("jiong.history"));
}

std::vector<DefectRecord> defects(int n) {
  std::vector<DefectRecord> out;
  for (int i = 1; i <= n; ++i) out.push_back({"F" + std::to_string(i), "defect " + std::to_string(i), {}});
  return out;
}

// Random well-formed history over F1..F6.
DebugHistory random_history(const std::string& pid) {
  DebugHistory h;
  h.programmer_id = pid;
  int n = test::uniform(1, 7);
  for (int v = 1; v <= n; ++v) h.versions.push_back({v, Verdict::kUnknown, {}, {}});
  for (int d = 1; d <= 6; ++d) {
    if (!test::coin(0.4)) continue;
    std::string id = "F" + std::to_string(d);
    int intro = test::coin(0.5) ? 1 : test::uniform(1, n);
    if (intro > 1) h.versions[intro - 1].introduced.insert(id);
    if (intro < n && test::coin(0.7)) h.versions[test::uniform(intro + 1, n) - 1].fixed.insert(id);
    else if (intro == 1) h.versions[0].introduced.insert(id);
  }
  const Verdict finals[] = {Verdict::kAC, Verdict::kWA, Verdict::kTL, Verdict::kUnknown};
  h.versions.back().verdict = finals[test::uniform(0, 3)];
  return h;
}

int count_incidences(const Corpus& c) {
  int n = 0;
  for (const auto& h : c.histories) {
    int versions = h.version_count();
    for (const auto& d : c.defects) {
      int intro = 0, fix = versions + 1;
      for (const auto& v : h.versions) {
        if (v.introduced.count(d.defect_id)) intro = v.index;
        if (v.fixed.count(d.defect_id)) fix = v.index;
      }
      bool referenced = intro > 0 || fix <= versions;
      if (referenced && std::max(intro, 1) < fix) ++n;
    }
  }
  return n;
}

}  // namespace

TEST_CASE("history grammar examples") {
  SUBCASE("bare fixes") {
    auto h = parse_history_line("P07 | N F15 F2 N N F6 !AC");
    CHECK(h.programmer_id == "P07");
    CHECK(h.version_count() == 6);
    CHECK(h.fixed_at("F15") == 2);
    CHECK(h.fixed_at("F2") == 3);
    CHECK(h.fixed_at("F6") == 6);
    for (const char* id : {"F15", "F2", "F6"}) CHECK(h.introduced_at(id) == 1);
    CHECK(h.versions_present("F6") == 5);
    CHECK(h.accepted());
    CHECK(h.unfixed_at_end().empty());
  }
  SUBCASE("late introduction") {
    auto h = parse_history_line("P08 | +F9@3 N N N N F9 N");
    CHECK(h.version_count() == 6);
    CHECK(h.introduced_at("F9") == 3);
    CHECK(h.fixed_at("F9") == 5);
    CHECK_FALSE(h.present_at("F9", 2));
    CHECK(h.present_at("F9", 3));
    CHECK(h.present_at("F9", 4));
    CHECK_FALSE(h.present_at("F9", 5));
    CHECK(h.versions_present("F9") == 2);
    CHECK_FALSE(h.accepted());
  }
  SUBCASE("introduction defaults to the next version") {
    auto h = parse_history_line("P10 | N +F3,F4 N -F3,F4 N !REJ");
    CHECK(h.introduced_at("F3") == 2);
    CHECK(h.introduced_at("F4") == 2);
    CHECK(h.fixed_at("F4") == 3);
    CHECK(h.versions.back().verdict == Verdict::kUnknown);
  }
  SUBCASE("unfixed defects stay present") {
    auto h = parse_history_line("P11 | +F1 N N !WA  # still wrong");
    CHECK(h.unfixed_at_end() == std::set<std::string>{"F1"});
    CHECK(h.versions_present("F1") == 2);
    CHECK(h.versions.back().verdict == Verdict::kWA);
  }
  SUBCASE("a fix twice") {
    try {
      parse_history_line("P09 | F2 F2");
      FAIL("expected DuplicateFix");
    } catch (const DuplicateFix& e) {
      CHECK(e.defect_id() == "F2");
    }
  }
  SUBCASE("fix at or before the introduction") {
    CHECK_THROWS_AS(parse_history_line("P12 | +F9@3 N F9 N"), FixBeforeIntroduction);
    CHECK_THROWS_AS(parse_history_line("P12 | N F9 +F9 N"), FixBeforeIntroduction);
  }
}

TEST_CASE("bad tokens are located") {
  auto where = [](const std::string& line) {
    try {
      parse_history_line(line, 4);
    } catch (const BadToken& e) {
      CHECK(e.line() == 4);
      return e.column();
    }
    FAIL("expected BadToken for " << line);
    return 0;
  };
  CHECK(where("P1 | N 7X N") == 8);
  CHECK(where("P1 | N !AC N") == 8);
  CHECK(where("P1 | N +F1@x") == 8);
  CHECK(where("P1 | N +F1@9") == 8);
  CHECK(where("P1 | N +F1") == 8);
  CHECK(where("P1 N N") == 1);
  CHECK(where("P1 |") == 5);
  CHECK(where("P1 | N !OK") == 8);
}

TEST_CASE("history files") {
  auto file = parse_histories("# header\n@participants 9\n\nA | N F1 !AC\nB | F2\n");
  CHECK(file.participants == 9);
  CHECK(file.histories.size() == 2);
  auto c = make_corpus(defects(2), file);
  CHECK(c.participants_total == 9);
  CHECK(validate_corpus(c).empty());
  CHECK(make_corpus(defects(2), parse_histories("A | N\n")).participants_total == 1);
  try {
    parse_histories("A | N\nB | N $\n");
    FAIL("expected BadToken");
  } catch (const BadToken& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("defect tables") {
  auto table = parse_defect_table("defect_id,description,predicted_by\nF1,\"a, quoted\",ES3\nF2,plain,\n");
  REQUIRE(table.size() == 2);
  CHECK(table[0].description == "a, quoted");
  CHECK(table[0].predicted_by == "ES3");
  CHECK_FALSE(table[1].predicted_by.has_value());
  CHECK(parse_defect_table(serialize_defect_table(table)) == table);
  CHECK_THROWS_AS(parse_defect_table("id,text\nF1,x\n"), CorpusError);
}

TEST_CASE("occurrence and coincidence") {
  auto c = make_corpus(defects(3), parse_histories("A | N F1 N\nB | N F1 F2\nC | +F2@2 N N\n"));
  CHECK(occurrence(c, "F1") == 2);
  CHECK(occurrence(c, "F2") == 2);
  CHECK(occurrence(c, "F3") == 0);
  CHECK(coincident_defects(c) == std::set<std::string>{"F1", "F2"});
  CHECK_THROWS_AS(occurrence(c, "F99"), UnknownDefect);
  auto single = make_corpus(defects(2), parse_histories("A | F1\nB | F2\n"));
  CHECK(coincident_defects(single).empty());
}

TEST_CASE("the jiong corpus") {
  Corpus c = jiong();
  CHECK(validate_corpus(c).empty());
  CHECK(c.defects.size() == 22);
  CHECK(c.participants_total == 55);
  CHECK(occurrence(c, "F2") == 23);
  int sum = 0;
  for (const auto& d : c.defects) sum += occurrence(c, d.defect_id);
  CHECK(sum == 70);
  auto co = coincident_defects(c);
  CHECK(co == std::set<std::string>{"F1", "F2", "F6", "F7", "F9", "F10", "F17", "F18", "F21"});
  int co_sum = 0;
  for (const auto& id : co) co_sum += occurrence(c, id);
  CHECK(co_sum == 57);
}

TEST_CASE("validate_corpus findings") {
  auto c = make_corpus(defects(2), parse_histories("A | N F1 N\nB | F99 N\n"));
  auto fs = validate_corpus(c);
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].location_ref == "B/F99");
  CHECK(fs[0].message == "unknown defect F99");

  c = make_corpus(defects(2), parse_histories("A | N F1 N\n"));
  c.histories[0].versions[1].index = 5;
  fs = validate_corpus(c);
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].location_ref == "A");

  c = make_corpus(defects(2), parse_histories("A | N\nB | N\n"));
  c.participants_total = 1;
  fs = validate_corpus(c);
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].location_ref == "participants");

  c = make_corpus(defects(2), parse_histories("A | N\nA | N\n"));
  CHECK(validate_corpus(c).size() == 1);

  c = make_corpus(defects(2), parse_histories("A | N F1\n"));
  c.histories[0].versions[1].introduced.insert("F1");
  CHECK(validate_corpus(c).size() >= 1);
}

TEST_CASE("serialized corpora reparse to equal corpora") {
  for (int trial = 0; trial < 500; ++trial) {
    Corpus c;
    c.defects = defects(6);
    int n = test::uniform(0, 6);
    for (int i = 0; i < n; ++i) c.histories.push_back(random_history("P" + std::to_string(i)));
    c.participants_total = n + test::uniform(0, 3);
    REQUIRE(validate_corpus(c).empty());
    std::string text = serialize_histories(c);
    CAPTURE(text);
    Corpus back = make_corpus(parse_defect_table(serialize_defect_table(c.defects)), parse_histories(text));
    CHECK(back == c);
  }
}

TEST_CASE("occurrences sum to the incidence count") {
  for (int trial = 0; trial < 500; ++trial) {
    Corpus c;
    c.defects = defects(6);
    int n = test::uniform(0, 8);
    for (int i = 0; i < n; ++i) c.histories.push_back(random_history("P" + std::to_string(i)));
    int sum = 0;
    for (const auto& d : c.defects) sum += occurrence(c, d.defect_id);
    CHECK(sum == count_incidences(c));
  }
}

TEST_CASE("history parsing is total") {
  const std::vector<std::string> alphabet = {"N", "F1", "F2", "-F1,F2", "+F3", "+F1@2", "+F2@0",
                                             "!AC", "!REJ", "!XX", "#", "|", "P1", "@", ",", "F",
                                             "-", "+", "F0", "F12a"};
  for (int trial = 0; trial < 3000; ++trial) {
    std::string line = test::coin(0.8) ? "P1 |" : "";
    int n = test::uniform(0, 8);
    for (int i = 0; i < n; ++i) line += " " + alphabet[test::uniform(0, static_cast<int>(alphabet.size()) - 1)];
    CAPTURE(line);
    try {
      auto h = parse_history_line(line);
      CHECK(h.version_count() >= 1);
    } catch (const CorpusError&) {
    }
  }
}
