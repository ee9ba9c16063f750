#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "venuerec/neighborhood.hpp"

using namespace venuerec;
using Catch::Matchers::WithinAbs;

namespace {

// x and u1 co-rate {a, b}; u1's mean over that set is 2.0 and its rating for
// the target venue t is 2.5, so its deviation is +0.5. x's own mean is 3.0.
RatingMatrix deviation_fixture() {
  RatingMatrix m;
  m.add("x", "a", 2.0);
  m.add("x", "b", 4.0);
  m.add("u1", "a", 1.0);
  m.add("u1", "b", 3.0);
  m.add("u1", "t", 2.5);
  return m;
}

SimilarityModel user_model(std::initializer_list<std::tuple<std::string, std::string, double>> scores) {
  SimilarityModel model(SimilarityAxis::UserUser, SimilarityKind::Euclidean);
  for (const auto& [a, b, s] : scores) model.insert(a, b, s, 2);
  return model;
}

}  // namespace

TEST_CASE("select_neighbors picks top-k by similarity") {
  RatingMatrix m;
  m.add("x", "a", 1.0);
  for (const auto& u : {"u1", "u2", "u3"}) {
    m.add(u, "a", 1.0);
    m.add(u, "t", 1.0);
  }
  const auto model = user_model({{"x", "u1", 0.9}, {"x", "u2", 0.5}, {"x", "u3", 0.1}});

  const auto top2 = select_neighbors("x", "t", m, model, NeighborhoodPolicy::top_k(2));
  REQUIRE(top2.size() == 2);
  CHECK(top2[0].id == "u1");
  CHECK(top2[1].id == "u2");

  const auto above = select_neighbors("x", "t", m, model, NeighborhoodPolicy::min_similarity(0.6));
  REQUIRE(above.size() == 1);
  CHECK(above[0].id == "u1");

  CHECK(select_neighbors("x", "cold", m, model, NeighborhoodPolicy::top_k(2)).empty());
}

TEST_CASE("user-based prediction adds the weighted neighbor deviation") {
  const auto m = deviation_fixture();
  const auto model = user_model({{"x", "u1", 1.0}});
  const auto p = predict_user_based("x", "t", m, model, NeighborhoodPolicy::top_k(5));
  REQUIRE(p);
  CHECK_THAT(p->value, WithinAbs(3.5, 1e-12));  // r̄_x + 0.5
  CHECK(p->support == 1);
}

TEST_CASE("a single positive neighbor's similarity magnitude cancels") {
  const auto m = deviation_fixture();
  for (double s : {0.1, 0.5, 1.0}) {
    const auto model = user_model({{"x", "u1", s}});
    const auto p = predict_user_based("x", "t", m, model, NeighborhoodPolicy::top_k(5));
    REQUIRE(p);
    CHECK_THAT(p->value, WithinAbs(3.5, 1e-12));
  }
}

TEST_CASE("empty neighborhoods fall back to the user mean only when inferring") {
  const auto m = deviation_fixture();
  const auto model = user_model({{"x", "u1", 1.0}});
  CHECK_FALSE(predict_user_based("x", "cold", m, model, NeighborhoodPolicy::top_k(5)));
  const auto p = predict_user_based("x", "cold", m, model, NeighborhoodPolicy::top_k(5, true));
  REQUIRE(p);
  CHECK_THAT(p->value, WithinAbs(3.0, 1e-12));
  CHECK(p->support == 0);
}

TEST_CASE("symmetric deviations cancel") {
  RatingMatrix m;
  m.add("x", "a", 2.0);
  m.add("x", "b", 4.0);
  // u1 deviates +1 on t, u2 deviates -1; equal similarity.
  m.add("u1", "a", 2.0);
  m.add("u1", "b", 2.0);
  m.add("u1", "t", 3.0);
  m.add("u2", "a", 3.0);
  m.add("u2", "b", 3.0);
  m.add("u2", "t", 2.0);
  const auto model = user_model({{"x", "u1", 0.5}, {"x", "u2", 0.5}});
  const auto p = predict_user_based("x", "t", m, model, NeighborhoodPolicy::top_k(5));
  REQUIRE(p);
  CHECK_THAT(p->value, WithinAbs(3.0, 1e-12));  // r̄_x
  CHECK(p->support == 2);
}

TEST_CASE("unknown researcher is an error for user-based prediction") {
  const auto m = deviation_fixture();
  const auto model = user_model({{"x", "u1", 1.0}});
  CHECK_THROWS_AS(predict_user_based("ghost", "t", m, model, NeighborhoodPolicy::top_k(2)),
                  std::invalid_argument);
}

TEST_CASE("predictions are clamped to the observed range, raw kept") {
  RatingMatrix m;
  m.add("x", "a", 4.0);
  m.add("x", "b", 5.0);
  m.add("u1", "a", 1.0);
  m.add("u1", "b", 2.0);
  m.add("u1", "t", 5.0);  // deviation +3.5 over co-rated mean 1.5
  const auto model = user_model({{"x", "u1", 1.0}});
  const auto p = predict_user_based("x", "t", m, model, NeighborhoodPolicy::top_k(5));
  REQUIRE(p);
  CHECK(p->raw_value == 8.0);  // 4.5 + 3.5
  CHECK(p->value == 5.0);      // clamped to max
}

TEST_CASE("shifting a user's ratings shifts raw predictions by the same amount") {
  oracle::Gen gen(2024);
  const double shift = 1.75;
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = gen.random_matrix(6, 8, 0.6);
    const auto model = gen.random_model(m, SimilarityAxis::UserUser, 0.9);
    const std::string x = m.rows().begin()->first;

    RatingMatrix shifted;
    for (const auto& [u, row] : m.rows())
      for (const auto& [v, r] : row) shifted.add(u, v, u == x ? r + shift : r);

    for (const auto& [v, col] : m.columns()) {
      (void)col;
      if (m.row(x).count(v)) continue;
      const auto before = predict_user_based(x, v, m, model, NeighborhoodPolicy::top_k(3));
      const auto after = predict_user_based(x, v, shifted, model, NeighborhoodPolicy::top_k(3));
      REQUIRE(before.has_value() == after.has_value());
      if (before) {
        CHECK_THAT(after->raw_value, WithinAbs(before->raw_value + shift, 1e-9));
        ++checked;
      }
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("candidate enumeration order cannot change predictions") {
  oracle::Gen gen(31);
  const auto m = gen.random_matrix(7, 9, 0.5);
  const auto model = gen.random_model(m, SimilarityAxis::UserUser, 0.8);

  // Same content inserted in a different order.
  std::vector<std::tuple<std::string, std::string, double>> cells;
  for (const auto& [u, row] : m.rows())
    for (const auto& [v, r] : row) cells.emplace_back(u, v, r);
  std::shuffle(cells.begin(), cells.end(), gen.rng);
  RatingMatrix reordered;
  for (const auto& [u, v, r] : cells) reordered.add(u, v, r);

  for (const auto& [u, row] : m.rows()) {
    (void)row;
    for (const auto& [v, col] : m.columns()) {
      (void)col;
      const auto a = predict_user_based(u, v, m, model, NeighborhoodPolicy::top_k(3));
      const auto b = predict_user_based(u, v, reordered, model, NeighborhoodPolicy::top_k(3));
      REQUIRE(a.has_value() == b.has_value());
      if (a) {
        CHECK(a->value == b->value);
        CHECK(a->value >= *m.min_rating());
        CHECK(a->value <= *m.max_rating());
      }
    }
  }
}

namespace {

// v's all-user mean is 2.0; w is co-rated with v by u1 whose w-rating is 1.0,
// so x's deviation on w is +0.3 when x rates w at 1.3.
RatingMatrix item_fixture() {
  RatingMatrix m;
  m.add("u1", "v", 1.0);
  m.add("u1", "w", 1.0);
  m.add("u2", "v", 3.0);
  m.add("x", "w", 1.3);
  return m;
}

SimilarityModel item_model(std::initializer_list<std::tuple<std::string, std::string, double>> scores) {
  SimilarityModel model(SimilarityAxis::ItemItem, SimilarityKind::Euclidean);
  for (const auto& [a, b, s] : scores) model.insert(a, b, s, 1);
  return model;
}

}  // namespace

TEST_CASE("item-based prediction centers on the venue mean") {
  const auto m = item_fixture();
  const auto model = item_model({{"v", "w", 1.0}});
  const auto p = predict_item_based("x", "v", m, model, NeighborhoodPolicy::top_k(5));
  REQUIRE(p);
  CHECK_THAT(p->value, WithinAbs(2.3, 1e-12));  // r̄_v + 0.3
  CHECK(p->support == 1);
}

TEST_CASE("item-based fallback and unknown-venue rules") {
  auto m = item_fixture();
  m.add("u3", "lonely", 3.5);  // rated, but similar to nothing
  const auto model = item_model({{"v", "w", 1.0}});

  CHECK_FALSE(predict_item_based("x", "lonely", m, model, NeighborhoodPolicy::top_k(5)));
  const auto fallback =
      predict_item_based("x", "lonely", m, model, NeighborhoodPolicy::top_k(5, true));
  REQUIRE(fallback);
  CHECK_THAT(fallback->value, WithinAbs(3.5, 1e-12));  // the venue's own mean
  CHECK(fallback->support == 0);

  CHECK_FALSE(predict_item_based("x", "nowhere", m, model, NeighborhoodPolicy::top_k(5)));
  const auto inferred =
      predict_item_based("x", "nowhere", m, model, NeighborhoodPolicy::top_k(5, true));
  REQUIRE(inferred);
  CHECK_THAT(inferred->raw_value, WithinAbs(*m.global_mean(), 1e-12));
}

TEST_CASE("equal-similarity item neighbors average their deviations") {
  RatingMatrix m;
  // Venue t has mean 2.0. Venues w1, w2, w3 each co-rated with t by u1.
  m.add("u1", "t", 2.0);
  m.add("u1", "w1", 1.0);
  m.add("u1", "w2", 2.0);
  m.add("u1", "w3", 3.0);
  // x's deviations on w1..w3: +0.6, +0.9, +1.5 -> average +1.0
  m.add("x", "w1", 1.6);
  m.add("x", "w2", 2.9);
  m.add("x", "w3", 4.5);
  const auto model = item_model({{"t", "w1", 0.7}, {"t", "w2", 0.7}, {"t", "w3", 0.7}});
  const auto p = predict_item_based("x", "t", m, model, NeighborhoodPolicy::top_k(5));
  REQUIRE(p);
  CHECK_THAT(p->raw_value, WithinAbs(3.0, 1e-12));
  CHECK(p->support == 3);
}

TEST_CASE("recommend ranks unrated venues and respects ties") {
  RatingMatrix m;
  m.add("x", "rated", 3.0);
  m.add("u1", "rated", 3.0);
  m.add("u1", "AAA", 2.0);
  m.add("u1", "BBB", 2.0);
  m.add("u1", "CCC", 1.0);
  const auto model = user_model({{"x", "u1", 1.0}});
  const auto policy = NeighborhoodPolicy::top_k(3, true);

  const auto rec = recommend("x", m, model, policy, 10);
  REQUIRE(rec.items.size() == 3);
  CHECK(rec.items[0].first == "AAA");  // tie with BBB broken by id
  CHECK(rec.items[1].first == "BBB");
  CHECK(rec.items[2].first == "CCC");
  CHECK(rec.items[0].second >= rec.items[1].second);
  CHECK(rec.items[1].second >= rec.items[2].second);

  SECTION("truncation") {
    const auto top2 = recommend("x", m, model, policy, 2);
    REQUIRE(top2.items.size() == 2);
    CHECK(top2.items[0].first == "AAA");
  }
  SECTION("already-rated venues never appear") {
    for (const auto& [v, s] : rec.items) {
      (void)s;
      CHECK(v != "rated");
    }
  }
  SECTION("unknown researcher") {
    CHECK_THROWS_AS(recommend("ghost", m, model, policy, 3), std::invalid_argument);
  }
}

TEST_CASE("a researcher who rated everything gets an empty recommendation") {
  RatingMatrix m;
  m.add("x", "a", 1.0);
  m.add("x", "b", 2.0);
  const auto model = user_model({});
  CHECK(recommend("x", m, model, NeighborhoodPolicy::top_k(2, true), 5).items.empty());
}

TEST_CASE("ranking follows predicted values") {
  oracle::Gen gen(91);
  const auto m = gen.random_matrix(6, 8, 0.6);
  const auto model = gen.random_model(m, SimilarityAxis::UserUser, 0.9);
  const auto policy = NeighborhoodPolicy::top_k(3);
  const std::string x = m.rows().begin()->first;
  const auto rec = recommend(x, m, model, policy, 8);
  for (const auto& [v, score] : rec.items) {
    const auto p = predict_user_based(x, v, m, model, policy);
    REQUIRE(p);
    CHECK(p->value == score);
  }
  for (std::size_t i = 1; i < rec.items.size(); ++i)
    CHECK(rec.items[i - 1].second >= rec.items[i].second);
}

TEST_CASE("boolean baseline weighs venues by summed neighbor similarity") {
  RatingMatrix m;
  m.add("x", "seed", 1.0);
  for (const auto& u : {"n1", "n2", "n3"}) m.add(u, "seed", 1.0);
  m.add("n1", "popular", 1.0);
  m.add("n2", "popular", 1.0);
  m.add("n3", "niche", 1.0);
  SimilarityModel model(SimilarityAxis::UserUser, SimilarityKind::LogLikelihood);
  model.insert("x", "n1", 0.9, 1);
  model.insert("x", "n2", 0.8, 1);
  model.insert("x", "n3", 0.95, 1);

  const auto rec = recommend_boolean_baseline("x", m, model, NeighborhoodPolicy::top_k(5), 10);
  REQUIRE(rec.items.size() == 2);
  CHECK(rec.items[0].first == "popular");  // 1.7 beats 0.95
  CHECK_THAT(rec.items[0].second, WithinAbs(1.7, 1e-12));
  CHECK_THAT(rec.items[1].second, WithinAbs(0.95, 1e-12));

  SECTION("no neighbors, no recommendations") {
    SimilarityModel empty(SimilarityAxis::UserUser, SimilarityKind::LogLikelihood);
    CHECK(recommend_boolean_baseline("x", m, empty, NeighborhoodPolicy::top_k(5), 10)
              .items.empty());
  }
  SECTION("a single neighbor yields its venues in id order") {
    SimilarityModel one(SimilarityAxis::UserUser, SimilarityKind::LogLikelihood);
    one.insert("x", "n1", 0.5, 1);
    const auto only = recommend_boolean_baseline("x", m, one, NeighborhoodPolicy::top_k(5), 10);
    REQUIRE(only.items.size() == 1);
    CHECK(only.items[0].first == "popular");
  }
}

TEST_CASE("recommendation CSV format") {
  Recommendation rec;
  rec.researcher = "x";
  rec.items = {{"a", 2.5}, {"b", 1.0}};
  std::ostringstream out;
  write_recommendation_csv(out, rec);
  CHECK(out.str() == "researcher,rank,venue,score\nx,1,a,2.5\nx,2,b,1\n");
}
