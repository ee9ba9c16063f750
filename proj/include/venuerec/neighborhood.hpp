#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "venuerec/csv.hpp"
#include "venuerec/rating.hpp"
#include "venuerec/similarity.hpp"

namespace venuerec {

struct NeighborhoodPolicy {
  enum class Mode { TopK, Threshold };

  Mode mode = Mode::TopK;
  int k = 10;               // TopK: neighborhood size
  double threshold = 0.0;   // Threshold: minimum similarity in [0, 1]
  bool infer_missing = false;  // fall back to the centering mean when no neighbors exist

  static NeighborhoodPolicy top_k(int k, bool infer_missing = false) {
    if (k < 1) throw std::invalid_argument("neighborhood size must be >= 1");
    NeighborhoodPolicy p;
    p.mode = Mode::TopK;
    p.k = k;
    p.infer_missing = infer_missing;
    return p;
  }

  static NeighborhoodPolicy min_similarity(double threshold, bool infer_missing = false) {
    if (threshold < 0.0 || threshold > 1.0)
      throw std::invalid_argument("similarity threshold must lie in [0, 1]");
    NeighborhoodPolicy p;
    p.mode = Mode::Threshold;
    p.threshold = threshold;
    p.infer_missing = infer_missing;
    return p;
  }
};

struct Neighbor {
  std::string id;
  double similarity = 0.0;
};

struct Prediction {
  double value = 0.0;      // clamped to the matrix rating range
  double raw_value = 0.0;  // before clamping
  int support = 0;         // neighbors contributing to the estimate
};

struct Recommendation {
  ResearcherId researcher;
  std::vector<std::pair<VenueId, double>> items;  // descending score, ties by venue id
};

namespace detail {

// Negative similarities are kept; TopK means the k largest signed scores.
// Ties break on ascending id so selection is deterministic.
inline std::vector<Neighbor> select_by_policy(std::vector<Neighbor> candidates,
                                              const NeighborhoodPolicy& policy) {
  std::sort(candidates.begin(), candidates.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.id < b.id;
  });
  if (policy.mode == NeighborhoodPolicy::Mode::TopK) {
    if (candidates.size() > static_cast<std::size_t>(policy.k))
      candidates.resize(static_cast<std::size_t>(policy.k));
    return candidates;
  }
  std::vector<Neighbor> kept;
  for (auto& c : candidates)
    if (c.similarity >= policy.threshold) kept.push_back(std::move(c));
  return kept;
}

// Mean of b's values over the keys present in both rows.
inline std::optional<double> mean_over_common(const RatingRow& a, const RatingRow& b) {
  double sum = 0.0;
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) ++ia;
    else if (ib->first < ia->first) ++ib;
    else { sum += ib->second; ++n; ++ia; ++ib; }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace detail

// U_v(x): the policy-selected users most similar to x among those who rated v.
inline std::vector<Neighbor> select_neighbors(const ResearcherId& x, const VenueId& v,
                                              const RatingMatrix& matrix,
                                              const SimilarityModel& model,
                                              const NeighborhoodPolicy& policy) {
  if (model.axis() != SimilarityAxis::UserUser)
    throw std::invalid_argument("select_neighbors requires a user-user similarity model");
  std::vector<Neighbor> candidates;
  for (const auto& [u, rating] : matrix.column(v)) {
    (void)rating;
    if (u == x) continue;
    if (auto s = model.score(x, u)) candidates.push_back(Neighbor{u, *s});
  }
  return detail::select_by_policy(std::move(candidates), policy);
}

// User mean-centering prediction: the target's overall mean plus the
// similarity-weighted neighbor deviations, each neighbor centered on its own
// mean over the venues it co-rated with x. Empty neighborhoods fall back to
// the target mean when inference is enabled, otherwise there is no prediction.
inline std::optional<Prediction> predict_user_based(const ResearcherId& x, const VenueId& v,
                                                    const RatingMatrix& matrix,
                                                    const SimilarityModel& model,
                                                    const NeighborhoodPolicy& policy) {
  if (!matrix.contains_user(x)) throw std::invalid_argument("unknown researcher: " + x);
  const double target_mean = *matrix.user_mean(x);
  const auto neighbors = select_neighbors(x, v, matrix, model, policy);

  double numerator = 0.0;
  double denominator = 0.0;
  int used = 0;
  for (const auto& nb : neighbors) {
    const double neighbor_rating = *matrix.get(nb.id, v);
    // A model built over this matrix guarantees a non-empty co-rated set;
    // skip entries that violate that rather than divide by zero.
    const auto neighbor_mean = detail::mean_over_common(matrix.row(x), matrix.row(nb.id));
    if (!neighbor_mean) continue;
    numerator += (neighbor_rating - *neighbor_mean) * nb.similarity;
    denominator += std::abs(nb.similarity);
    ++used;
  }
  if (used == 0 || denominator == 0.0) {
    if (!policy.infer_missing) return std::nullopt;
    return Prediction{matrix.clamp(target_mean), target_mean, 0};
  }
  const double raw = target_mean + numerator / denominator;
  return Prediction{matrix.clamp(raw), raw, used};
}

// Item mean-centering prediction over W_x(v): the venues rated by x most
// similar to v. The centering term is v's all-user mean; each co-venue w is
// centered on its mean over the users who rated both w and v.
inline std::optional<Prediction> predict_item_based(const ResearcherId& x, const VenueId& v,
                                                    const RatingMatrix& matrix,
                                                    const SimilarityModel& model,
                                                    const NeighborhoodPolicy& policy) {
  if (model.axis() != SimilarityAxis::ItemItem)
    throw std::invalid_argument("predict_item_based requires an item-item similarity model");
  if (!matrix.contains_venue(v)) {
    if (!policy.infer_missing || matrix.empty()) return std::nullopt;
    const double g = *matrix.global_mean();
    return Prediction{matrix.clamp(g), g, 0};
  }
  std::vector<Neighbor> candidates;
  for (const auto& [w, rating] : matrix.row(x)) {
    (void)rating;
    if (w == v) continue;
    if (auto s = model.score(v, w)) candidates.push_back(Neighbor{w, *s});
  }
  const auto selected = detail::select_by_policy(std::move(candidates), policy);

  const double venue_mean = *matrix.venue_mean(v);
  double numerator = 0.0;
  double denominator = 0.0;
  int used = 0;
  for (const auto& nb : selected) {
    const double own_rating = matrix.row(x).at(nb.id);
    const auto co_mean = detail::mean_over_common(matrix.column(v), matrix.column(nb.id));
    if (!co_mean) continue;
    numerator += (own_rating - *co_mean) * nb.similarity;
    denominator += std::abs(nb.similarity);
    ++used;
  }
  if (used == 0 || denominator == 0.0) {
    if (!policy.infer_missing) return std::nullopt;
    return Prediction{matrix.clamp(venue_mean), venue_mean, 0};
  }
  const double raw = venue_mean + numerator / denominator;
  return Prediction{matrix.clamp(raw), raw, used};
}

namespace detail {

inline Recommendation rank_and_truncate(const ResearcherId& x,
                                        std::vector<std::pair<VenueId, double>> scored,
                                        int top_n) {
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (scored.size() > static_cast<std::size_t>(top_n))
    scored.resize(static_cast<std::size_t>(top_n));
  return Recommendation{x, std::move(scored)};
}

}  // namespace detail

// Ranks every venue the researcher has not rated by its predicted rating.
// Dispatches on the model axis.
inline Recommendation recommend(const ResearcherId& x, const RatingMatrix& matrix,
                                const SimilarityModel& model, const NeighborhoodPolicy& policy,
                                int top_n) {
  if (top_n < 1) throw std::invalid_argument("top_n must be >= 1");
  if (!matrix.contains_user(x)) throw std::invalid_argument("unknown researcher: " + x);
  const auto& rated = matrix.row(x);
  std::vector<std::pair<VenueId, double>> scored;
  for (const auto& [v, column] : matrix.columns()) {
    (void)column;
    if (rated.count(v)) continue;
    const auto p = model.axis() == SimilarityAxis::UserUser
                       ? predict_user_based(x, v, matrix, model, policy)
                       : predict_item_based(x, v, matrix, model, policy);
    if (p) scored.emplace_back(v, p->value);
  }
  return detail::rank_and_truncate(x, std::move(scored), top_n);
}

// Boolean baseline: a candidate venue's score is the summed log-likelihood
// similarity of the selected neighbors who rated it, so venues backed by many
// similar users rank first.
inline Recommendation recommend_boolean_baseline(const ResearcherId& x, const RatingMatrix& matrix,
                                                 const SimilarityModel& model,
                                                 const NeighborhoodPolicy& policy, int top_n) {
  if (top_n < 1) throw std::invalid_argument("top_n must be >= 1");
  if (!matrix.contains_user(x)) throw std::invalid_argument("unknown researcher: " + x);
  const auto& rated = matrix.row(x);
  std::vector<std::pair<VenueId, double>> scored;
  for (const auto& [v, column] : matrix.columns()) {
    (void)column;
    if (rated.count(v)) continue;
    const auto neighbors = select_neighbors(x, v, matrix, model, policy);
    if (neighbors.empty()) continue;
    double score = 0.0;
    for (const auto& nb : neighbors) score += nb.similarity;
    scored.emplace_back(v, score);
  }
  return detail::rank_and_truncate(x, std::move(scored), top_n);
}

inline void write_recommendation_csv(std::ostream& out, const Recommendation& rec) {
  out << "researcher,rank,venue,score\n";
  int rank = 1;
  for (const auto& [venue, score] : rec.items)
    out << csv_escape(rec.researcher) << ',' << rank++ << ',' << csv_escape(venue) << ','
        << format_value(score) << '\n';
}

}  // namespace venuerec
