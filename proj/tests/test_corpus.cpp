#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "venuerec/corpus.hpp"

using namespace venuerec;

namespace {
ParseResult parse(const std::string& text) {
  std::istringstream in(text);
  return parse_postings(in);
}
}  // namespace

TEST_CASE("parses a single well-formed row") {
  auto result = parse("researcher,article,venue,added_date\nu1,a1,VLDB,2010-03-02\n");
  REQUIRE(result.postings.size() == 1);
  CHECK(result.postings[0].researcher == "u1");
  CHECK(result.postings[0].article == "a1");
  CHECK(result.postings[0].venue == "VLDB");
  CHECK(result.postings[0].added_date == Date{2010, 3, 2});
  CHECK(result.stats.duplicates_dropped == 0);
}

TEST_CASE("drops repeated researcher-article pairs and counts them") {
  auto result = parse(
      "researcher,article,venue,added_date\n"
      "u1,a1,VLDB,2010-03-02\n"
      "u1,a1,VLDB,2010-03-02\n");
  CHECK(result.postings.size() == 1);
  CHECK(result.stats.duplicates_dropped == 1);
}

TEST_CASE("the earliest-dated duplicate wins") {
  auto result = parse(
      "researcher,article,venue,added_date\n"
      "u1,a1,VLDB,2011-06-01\n"
      "u1,a2,SIGIR,2011-07-01\n"
      "u1,a1,ICDE,2009-01-15\n");
  REQUIRE(result.postings.size() == 2);
  CHECK(result.postings[0].venue == "ICDE");  // position of first appearance, earliest data
  CHECK(result.postings[0].added_date == Date{2009, 1, 15});
  CHECK(result.stats.duplicates_dropped == 1);
}

TEST_CASE("invalid dates are rejected with the line number") {
  try {
    parse(
        "researcher,article,venue,added_date\n"
        "u1,a1,VLDB,2010-03-02\n"
        "u1,a2,VLDB,2010-13-40\n");
    FAIL("expected CsvError");
  } catch (const CsvError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("rows with the wrong field count are rejected") {
  try {
    parse("researcher,article,venue,added_date\nu1,a1,VLDB\n");
    FAIL("expected CsvError");
  } catch (const CsvError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("researcher ids with whitespace are rejected") {
  CHECK_THROWS_AS(parse("researcher,article,venue,added_date\nu 1,a1,VLDB,2010-01-01\n"),
                  CsvError);
}

TEST_CASE("an empty file after the header is an empty list") {
  auto result = parse("researcher,article,venue,added_date\n");
  CHECK(result.postings.empty());
}

TEST_CASE("a missing header is an error") {
  CHECK_THROWS_AS(parse(""), CsvError);
  CHECK_THROWS_AS(parse("user,item\n"), CsvError);
}

TEST_CASE("venueless rows are dropped and counted") {
  auto result = parse(
      "researcher,article,venue,added_date\n"
      "u1,a1,,2010-03-02\n"
      "u1,a2,VLDB,2010-03-02\n");
  CHECK(result.postings.size() == 1);
  CHECK(result.stats.missing_venue_dropped == 1);
}

TEST_CASE("quoted venue names survive a round trip") {
  std::vector<Posting> postings{
      {"u1", "a1", "Proc. VLDB, Vol. 3", Date{2010, 3, 2}},
      {"u1", "a2", "He said \"no\"", Date{2011, 4, 5}},
  };
  std::ostringstream out;
  write_postings_csv(out, postings);
  auto result = parse(out.str());
  REQUIRE(result.postings.size() == 2);
  CHECK(result.postings == postings);
}

TEST_CASE("aggregate counts references per year index") {
  std::vector<Posting> postings{
      {"u1", "a1", "V", Date{2010, 1, 1}}, {"u1", "a2", "V", Date{2010, 5, 1}},
      {"u1", "a3", "V", Date{2010, 9, 1}}, {"u1", "a4", "V", Date{2011, 2, 1}},
      {"u1", "a5", "V", Date{2011, 3, 1}}, {"u1", "a6", "V", Date{2011, 6, 1}},
      {"u1", "a7", "V", Date{2011, 8, 1}}, {"u1", "a8", "V", Date{2011, 12, 1}},
  };
  auto counts = aggregate(postings);
  REQUIRE(counts.size() == 1);
  CHECK(counts[0].span_years == 2);
  CHECK(counts[0].counts == std::map<int, long long>{{1, 3}, {2, 5}});
}

TEST_CASE("gap years stay implicit with a wider span") {
  std::vector<Posting> postings{
      {"u1", "a1", "V", Date{2010, 1, 1}},
      {"u1", "a2", "V", Date{2012, 1, 1}},
  };
  auto counts = aggregate(postings);
  REQUIRE(counts.size() == 1);
  CHECK(counts[0].span_years == 3);
  CHECK(counts[0].counts == std::map<int, long long>{{1, 1}, {3, 1}});
}

TEST_CASE("aggregate totals match a brute-force recount") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> user(1, 20);
  std::uniform_int_distribution<int> venue(1, 15);
  std::uniform_int_distribution<int> year(2005, 2015);
  std::vector<Posting> postings;
  for (int i = 0; i < 1000; ++i) {
    Posting p;
    p.researcher = "u" + std::to_string(user(rng));
    p.article = "a" + std::to_string(i);
    p.venue = "v" + std::to_string(venue(rng));
    p.added_date = Date{year(rng), 6, 15};
    postings.push_back(std::move(p));
  }
  auto counts = aggregate(postings);

  std::map<std::pair<std::string, std::string>, long long> brute;
  for (const auto& p : postings) ++brute[{p.researcher, p.venue}];
  REQUIRE(counts.size() == brute.size());
  long long total = 0;
  for (const auto& c : counts) {
    long long pair_total = 0;
    for (const auto& [i, n] : c.counts) {
      (void)i;
      pair_total += n;
    }
    CHECK(pair_total == brute.at({c.researcher, c.venue}));
    total += pair_total;
    CHECK(c.counts.at(1) >= 1);
    CHECK(c.counts.at(c.span_years) >= 1);
    CHECK(c.counts.begin()->first >= 1);
    CHECK(c.counts.rbegin()->first <= c.span_years);
  }
  CHECK(total == static_cast<long long>(postings.size()));

  SECTION("permutation of the input changes nothing") {
    auto shuffled = postings;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto again = aggregate(shuffled);
    REQUIRE(again.size() == counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
      CHECK(again[i].researcher == counts[i].researcher);
      CHECK(again[i].venue == counts[i].venue);
      CHECK(again[i].counts == counts[i].counts);
      CHECK(again[i].span_years == counts[i].span_years);
    }
  }
}
