#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "venuerec/csv.hpp"
#include "venuerec/factorization.hpp"
#include "venuerec/neighborhood.hpp"
#include "venuerec/rating.hpp"
#include "venuerec/similarity.hpp"

namespace venuerec {

struct SplitSpec {
  double train_fraction = 0.7;
  std::uint64_t rng_seed = 0;
};

// Per-user random partition: every rating draws against train_fraction, and
// a user with two or more ratings always keeps at least one in train (the
// lowest venue id is moved back if the draws put everything in test).
inline std::pair<RatingMatrix, RatingMatrix> split(const RatingMatrix& matrix,
                                                   const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0) || !(spec.train_fraction < 1.0))
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  if (matrix.empty()) throw std::invalid_argument("cannot split an empty rating matrix");

  std::mt19937_64 rng(spec.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RatingMatrix train;
  RatingMatrix test;
  for (const auto& [u, row] : matrix.rows()) {
    std::vector<std::pair<VenueId, double>> to_train;
    std::vector<std::pair<VenueId, double>> to_test;
    for (const auto& [v, r] : row)
      (unit(rng) < spec.train_fraction ? to_train : to_test).emplace_back(v, r);
    if (to_train.empty() && row.size() >= 2) {
      to_train.push_back(to_test.front());
      to_test.erase(to_test.begin());
    }
    for (const auto& [v, r] : to_train) train.add(u, v, r);
    for (const auto& [v, r] : to_test) test.add(u, v, r);
  }
  return {std::move(train), std::move(test)};
}

// Held-out venues whose rating reaches the user's train-side mean; the
// per-user relevance threshold of the protocol.
inline std::set<VenueId> relevant_set(const ResearcherId& user, const RatingMatrix& test,
                                      const RatingMatrix& train) {
  std::set<VenueId> out;
  const auto mean = train.user_mean(user);
  if (!mean) return out;
  for (const auto& [v, r] : test.row(user))
    if (r >= *mean) out.insert(v);
  return out;
}

// Precision over min(k, |recommended|) and recall over |relevant|.
inline std::pair<double, double> precision_recall(const std::vector<VenueId>& recommended,
                                                  const std::set<VenueId>& relevant, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (relevant.empty()) throw std::invalid_argument("relevant set must be non-empty");
  const std::size_t cut = std::min<std::size_t>(static_cast<std::size_t>(k), recommended.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < cut; ++i)
    if (relevant.count(recommended[i])) ++hits;
  const double precision =
      cut == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(cut);
  const double recall = static_cast<double>(hits) / static_cast<double>(relevant.size());
  return {precision, recall};
}

// DCG with gain 2^rel - 1 and discount log2(1 + position) over the
// recommended order; ungraded venues count as relevance zero. Normalized by
// the ideal DCG from the grades sorted descending. Absent when every grade
// is zero (the ideal DCG vanishes).
inline std::optional<double> ndcg(const std::vector<VenueId>& recommended,
                                  const std::map<VenueId, double>& grades, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  auto gain = [](double rel) { return std::exp2(rel) - 1.0; };
  auto discount = [](std::size_t position) {
    return std::log2(1.0 + static_cast<double>(position));
  };
  double dcg = 0.0;
  const std::size_t cut = std::min<std::size_t>(static_cast<std::size_t>(k), recommended.size());
  for (std::size_t i = 0; i < cut; ++i) {
    auto it = grades.find(recommended[i]);
    const double rel = it == grades.end() ? 0.0 : it->second;
    dcg += gain(rel) / discount(i + 1);
  }
  std::vector<double> ideal;
  ideal.reserve(grades.size());
  for (const auto& [v, rel] : grades) {
    (void)v;
    ideal.push_back(rel);
  }
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = 0.0;
  const std::size_t ideal_cut = std::min<std::size_t>(static_cast<std::size_t>(k), ideal.size());
  for (std::size_t i = 0; i < ideal_cut; ++i) idcg += gain(ideal[i]) / discount(i + 1);
  if (idcg == 0.0) return std::nullopt;
  return dcg / idcg;
}

// MAE and RMSE over the predicted pairs, normalized by the rating-range
// width so scores are comparable across rating scales.
inline std::pair<double, double> error_metrics(
    const std::vector<std::pair<double, double>>& predicted_actual,
    std::pair<double, double> rating_range) {
  if (predicted_actual.empty())
    throw std::invalid_argument("error metrics need at least one prediction");
  const double width = rating_range.second - rating_range.first;
  if (!(width > 0.0)) throw std::invalid_argument("rating range must have positive width");
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (const auto& [predicted, actual] : predicted_actual) {
    const double d = predicted - actual;
    abs_sum += std::abs(d);
    sq_sum += d * d;
  }
  const double n = static_cast<double>(predicted_actual.size());
  return {(abs_sum / n) / width, std::sqrt(sq_sum / n) / width};
}

// NDCG grades for one user: the held-out ratings min-max rescaled to [0, 5]
// so the exponentiated gain stays bounded (raw PVR is unbounded). Constant
// test ratings all map to 5; the scale constant cancels in the DCG ratio.
inline std::map<VenueId, double> ndcg_grades(const RatingMatrix::Row& test_row) {
  std::map<VenueId, double> grades;
  if (test_row.empty()) return grades;
  double lo = test_row.begin()->second;
  double hi = lo;
  for (const auto& [v, r] : test_row) {
    (void)v;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  for (const auto& [v, r] : test_row)
    grades[v] = hi > lo ? 5.0 * (r - lo) / (hi - lo) : 5.0;
  return grades;
}

enum class Algorithm { UserCF, ItemCF, Sgd, Svdpp, BooleanBaseline };

inline std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::UserCF: return "user_cf";
    case Algorithm::ItemCF: return "item_cf";
    case Algorithm::Sgd: return "sgd";
    case Algorithm::Svdpp: return "svdpp";
    case Algorithm::BooleanBaseline: return "baseline";
  }
  return "unknown";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "user_cf") return Algorithm::UserCF;
  if (name == "item_cf") return Algorithm::ItemCF;
  if (name == "sgd") return Algorithm::Sgd;
  if (name == "svdpp") return Algorithm::Svdpp;
  if (name == "baseline") return Algorithm::BooleanBaseline;
  return std::nullopt;
}

struct AlgoConfig {
  Algorithm algorithm = Algorithm::UserCF;
  SimilarityConfig similarity{};   // user_cf / item_cf; baseline forces loglik
  NeighborhoodPolicy policy{};     // CF and baseline neighborhoods
  TrainConfig train{};             // sgd / svdpp; variant is forced to match
};

// One trained/built recommender over a training matrix. recommend() follows
// each algorithm's ranking rule; predict() returns a rating estimate where
// the algorithm defines one (the Boolean baseline ranks but never predicts).
class Recommender {
 public:
  Recommender(RatingMatrix train, const AlgoConfig& config)
      : config_(config), train_(std::move(train)) {
    switch (config_.algorithm) {
      case Algorithm::UserCF:
        model_.emplace(build_similarity(train_, SimilarityAxis::UserUser, config_.similarity));
        break;
      case Algorithm::ItemCF:
        model_.emplace(build_similarity(train_, SimilarityAxis::ItemItem, config_.similarity));
        break;
      case Algorithm::BooleanBaseline: {
        boolean_train_ = train_.booleanized();
        SimilarityConfig sim = config_.similarity;
        sim.kind = SimilarityKind::LogLikelihood;
        model_.emplace(build_similarity(boolean_train_, SimilarityAxis::UserUser, sim));
        break;
      }
      case Algorithm::Sgd:
      case Algorithm::Svdpp: {
        TrainConfig tc = config_.train;
        tc.variant = config_.algorithm == Algorithm::Sgd ? FactorVariant::Sgd : FactorVariant::Svdpp;
        factor_.emplace(train_factor_model(train_, tc));
        break;
      }
    }
  }

  const RatingMatrix& train_matrix() const { return train_; }
  const AlgoConfig& config() const { return config_; }

  Recommendation recommend(const ResearcherId& user, int top_n) const {
    switch (config_.algorithm) {
      case Algorithm::UserCF:
      case Algorithm::ItemCF:
        return venuerec::recommend(user, train_, *model_, config_.policy, top_n);
      case Algorithm::BooleanBaseline:
        return recommend_boolean_baseline(user, boolean_train_, *model_, config_.policy, top_n);
      case Algorithm::Sgd:
      case Algorithm::Svdpp: {
        if (top_n < 1) throw std::invalid_argument("top_n must be >= 1");
        if (!train_.contains_user(user)) throw std::invalid_argument("unknown researcher: " + user);
        const auto& rated = train_.row(user);
        std::vector<std::pair<VenueId, double>> scored;
        for (const auto& [v, column] : train_.columns()) {
          (void)column;
          if (!rated.count(v)) scored.emplace_back(v, factor_->predict(user, v));
        }
        return detail::rank_and_truncate(user, std::move(scored), top_n);
      }
    }
    return Recommendation{user, {}};
  }

  std::optional<double> predict(const ResearcherId& user, const VenueId& venue) const {
    if (!train_.contains_user(user)) return std::nullopt;
    switch (config_.algorithm) {
      case Algorithm::UserCF: {
        auto p = predict_user_based(user, venue, train_, *model_, config_.policy);
        if (!p) return std::nullopt;
        return p->value;
      }
      case Algorithm::ItemCF: {
        auto p = predict_item_based(user, venue, train_, *model_, config_.policy);
        if (!p) return std::nullopt;
        return p->value;
      }
      case Algorithm::BooleanBaseline:
        return std::nullopt;
      case Algorithm::Sgd:
      case Algorithm::Svdpp:
        return factor_->predict(user, venue);
    }
    return std::nullopt;
  }

 private:
  AlgoConfig config_;
  RatingMatrix train_;
  RatingMatrix boolean_train_;
  std::optional<SimilarityModel> model_;
  std::optional<FactorModel> factor_;
};

// Fraction of the given users for whom the recommender produces a non-empty
// list.
inline double user_coverage(const Recommender& recommender,
                            const std::vector<ResearcherId>& test_users, int top_n = 10) {
  if (test_users.empty()) return 0.0;
  std::size_t covered = 0;
  for (const auto& u : test_users)
    if (!recommender.recommend(u, top_n).items.empty()) ++covered;
  return static_cast<double>(covered) / static_cast<double>(test_users.size());
}

using RecommendFn =
    std::function<Recommendation(const RatingMatrix&, const ResearcherId&, int)>;

// Hold-out protocol: remove the user's ten highest-rated venues, recommend
// ten from what remains, and score the overlap. Users with fewer than ten
// ratings are skipped (absent result).
inline std::optional<double> holdout_p10(const ResearcherId& user, const RatingMatrix& matrix,
                                         const RecommendFn& recommend_fn) {
  const auto& row = matrix.row(user);
  if (row.size() < 10) return std::nullopt;

  std::vector<std::pair<VenueId, double>> ranked(row.begin(), row.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::set<VenueId> held_out;
  for (std::size_t i = 0; i < 10; ++i) held_out.insert(ranked[i].first);

  RatingMatrix reduced;
  for (const auto& [u, r] : matrix.rows())
    for (const auto& [v, value] : r) {
      if (u == user && held_out.count(v)) continue;
      reduced.add(u, v, value);
    }
  if (!reduced.contains_user(user)) return 0.0;  // profile was exactly the held-out set

  const Recommendation rec = recommend_fn(reduced, user, 10);
  std::size_t hits = 0;
  for (const auto& [v, score] : rec.items) {
    (void)score;
    if (held_out.count(v)) ++hits;
  }
  return static_cast<double>(hits) / 10.0;
}

inline std::optional<double> holdout_p10(const ResearcherId& user, const RatingMatrix& matrix,
                                         const AlgoConfig& config) {
  return holdout_p10(user, matrix,
                     [&config](const RatingMatrix& reduced, const ResearcherId& u, int top_n) {
                       return Recommender(reduced, config).recommend(u, top_n);
                     });
}

// One row of the sweep report. Metrics that a configuration cannot produce
// (or that a failed cell never reached) are NaN.
struct EvalReport {
  std::string algorithm;
  std::string similarity;             // empty for factorization rows
  std::optional<int> neighborhood;    // TopK size
  std::optional<double> threshold;    // similarity threshold
  double train_ratio = 0.0;
  double p_at_k = std::numeric_limits<double>::quiet_NaN();
  double recall = std::numeric_limits<double>::quiet_NaN();
  double ndcg = std::numeric_limits<double>::quiet_NaN();
  double nmae = std::numeric_limits<double>::quiet_NaN();
  double nrmse = std::numeric_limits<double>::quiet_NaN();
  double coverage = std::numeric_limits<double>::quiet_NaN();
  long long users_evaluated = 0;
  long long users_skipped = 0;
  bool failed = false;
};

struct CellSpec {
  AlgoConfig algo{};
  double train_ratio = 0.7;
  int top_k = 10;
  std::uint64_t seed = 0;
};

namespace detail {

inline EvalReport report_shell(const CellSpec& spec) {
  EvalReport rep;
  rep.algorithm = std::string(algorithm_name(spec.algo.algorithm));
  switch (spec.algo.algorithm) {
    case Algorithm::UserCF:
    case Algorithm::ItemCF:
      rep.similarity = std::string(similarity_kind_name(spec.algo.similarity.kind));
      break;
    case Algorithm::BooleanBaseline:
      rep.similarity = std::string(similarity_kind_name(SimilarityKind::LogLikelihood));
      break;
    default:
      break;
  }
  const bool uses_policy = spec.algo.algorithm == Algorithm::UserCF ||
                           spec.algo.algorithm == Algorithm::ItemCF ||
                           spec.algo.algorithm == Algorithm::BooleanBaseline;
  if (uses_policy) {
    if (spec.algo.policy.mode == NeighborhoodPolicy::Mode::TopK)
      rep.neighborhood = spec.algo.policy.k;
    else
      rep.threshold = spec.algo.policy.threshold;
  }
  rep.train_ratio = spec.train_ratio;
  return rep;
}

}  // namespace detail

// Runs the protocol for one configuration: split, build, then walk the test
// users. Precision/recall/NDCG average over users with a non-empty relevant
// set; users without one are counted as skipped. Error metrics pool every
// predictable held-out pair; coverage counts users with any recommendation.
inline EvalReport evaluate_cell(const RatingMatrix& matrix, const CellSpec& spec) {
  EvalReport rep = detail::report_shell(spec);
  auto [train, test] = split(matrix, {spec.train_ratio, spec.seed});
  if (train.empty() || test.empty()) return rep;

  AlgoConfig algo = spec.algo;
  algo.train.rng_seed = spec.seed;
  const Recommender recommender(std::move(train), algo);
  const RatingMatrix& train_ref = recommender.train_matrix();

  std::vector<ResearcherId> test_users;
  for (const auto& [u, row] : test.rows()) {
    (void)row;
    if (train_ref.contains_user(u)) test_users.push_back(u);
  }

  double precision_sum = 0.0;
  double recall_sum = 0.0;
  double ndcg_sum = 0.0;
  long long evaluated = 0;
  long long skipped = 0;
  long long covered = 0;
  std::vector<std::pair<double, double>> predicted_actual;
  for (const auto& u : test_users) {
    const Recommendation recs = recommender.recommend(u, spec.top_k);
    if (!recs.items.empty()) ++covered;

    const auto relevant = relevant_set(u, test, train_ref);
    if (relevant.empty()) {
      ++skipped;
    } else {
      std::vector<VenueId> venues;
      venues.reserve(recs.items.size());
      for (const auto& [v, score] : recs.items) {
        (void)score;
        venues.push_back(v);
      }
      const auto [p, r] = precision_recall(venues, relevant, spec.top_k);
      const auto n = ndcg(venues, ndcg_grades(test.row(u)), spec.top_k);
      if (!n) {
        ++skipped;
      } else {
        precision_sum += p;
        recall_sum += r;
        ndcg_sum += *n;
        ++evaluated;
      }
    }

    for (const auto& [v, actual] : test.row(u))
      if (auto predicted = recommender.predict(u, v))
        predicted_actual.emplace_back(*predicted, actual);
  }

  rep.users_evaluated = evaluated;
  rep.users_skipped = skipped;
  if (evaluated > 0) {
    rep.p_at_k = precision_sum / static_cast<double>(evaluated);
    rep.recall = recall_sum / static_cast<double>(evaluated);
    rep.ndcg = ndcg_sum / static_cast<double>(evaluated);
  }
  const auto lo = train_ref.min_rating();
  const auto hi = train_ref.max_rating();
  if (!predicted_actual.empty() && lo && hi && *hi > *lo) {
    const auto [nmae, nrmse] = error_metrics(predicted_actual, {*lo, *hi});
    rep.nmae = nmae;
    rep.nrmse = nrmse;
  }
  if (!test_users.empty())
    rep.coverage = static_cast<double>(covered) / static_cast<double>(test_users.size());
  return rep;
}

// Aggregated hold-out P@10 over every user with at least ten ratings.
inline EvalReport holdout_report(const RatingMatrix& matrix, const AlgoConfig& config,
                                 int top_k = 10) {
  CellSpec shell_spec;
  shell_spec.algo = config;
  shell_spec.train_ratio = 1.0;
  shell_spec.top_k = top_k;
  EvalReport rep = detail::report_shell(shell_spec);
  double sum = 0.0;
  long long evaluated = 0;
  long long skipped = 0;
  for (const auto& [u, row] : matrix.rows()) {
    (void)row;
    if (auto p10 = holdout_p10(u, matrix, config)) {
      sum += *p10;
      ++evaluated;
    } else {
      ++skipped;
    }
  }
  rep.users_evaluated = evaluated;
  rep.users_skipped = skipped;
  if (evaluated > 0) rep.p_at_k = sum / static_cast<double>(evaluated);
  return rep;
}

struct SweepGrid {
  std::vector<Algorithm> algorithms;
  std::vector<SimilarityKind> similarities;     // user_cf / item_cf cells
  std::vector<int> neighborhood_sizes;          // TopK policies
  std::vector<double> similarity_thresholds;    // Threshold policies
  std::vector<double> train_ratios;
  std::optional<int> significance_threshold;
  int min_overlap = 1;
  bool infer_missing = false;
  int top_k = 10;
  TrainConfig train{};  // factorization hyperparameters; variant set per cell
};

// Cartesian sweep; the similarity and neighborhood dimensions apply only to
// the algorithms that have them. A failing cell is recorded as a NaN row and
// the sweep continues.
inline std::vector<EvalReport> sweep(const RatingMatrix& matrix, const SweepGrid& grid,
                                     std::uint64_t seed) {
  if (grid.algorithms.empty()) throw std::invalid_argument("empty grid: no algorithms");
  if (grid.train_ratios.empty()) throw std::invalid_argument("empty grid: no train ratios");

  std::vector<NeighborhoodPolicy> policies;
  for (int k : grid.neighborhood_sizes)
    policies.push_back(NeighborhoodPolicy::top_k(k, grid.infer_missing));
  for (double t : grid.similarity_thresholds)
    policies.push_back(NeighborhoodPolicy::min_similarity(t, grid.infer_missing));

  std::vector<EvalReport> reports;
  for (Algorithm algorithm : grid.algorithms) {
    const bool needs_similarity =
        algorithm == Algorithm::UserCF || algorithm == Algorithm::ItemCF;
    const bool needs_policy = needs_similarity || algorithm == Algorithm::BooleanBaseline;
    if (needs_similarity && grid.similarities.empty())
      throw std::invalid_argument("empty grid: no similarities for " +
                                  std::string(algorithm_name(algorithm)));
    if (needs_policy && policies.empty())
      throw std::invalid_argument("empty grid: no neighborhood sizes or thresholds for " +
                                  std::string(algorithm_name(algorithm)));

    const std::vector<SimilarityKind> sims =
        needs_similarity ? grid.similarities
                         : std::vector<SimilarityKind>{SimilarityKind::LogLikelihood};
    const std::vector<NeighborhoodPolicy> pols =
        needs_policy ? policies : std::vector<NeighborhoodPolicy>{NeighborhoodPolicy{}};

    for (double ratio : grid.train_ratios)
      for (SimilarityKind sim : sims)
        for (const NeighborhoodPolicy& policy : pols) {
          CellSpec spec;
          spec.algo.algorithm = algorithm;
          spec.algo.similarity =
              SimilarityConfig{sim, grid.significance_threshold, grid.min_overlap};
          spec.algo.policy = policy;
          spec.algo.train = grid.train;
          spec.train_ratio = ratio;
          spec.top_k = grid.top_k;
          spec.seed = seed;
          try {
            reports.push_back(evaluate_cell(matrix, spec));
          } catch (const std::exception&) {
            EvalReport failed = detail::report_shell(spec);
            failed.failed = true;
            reports.push_back(std::move(failed));
          }
        }
  }
  return reports;
}

inline void write_report_csv(std::ostream& out, const std::vector<EvalReport>& reports) {
  out << "algorithm,similarity,neighborhood,threshold,train_ratio,"
         "p_at_10,recall,ndcg,nmae,nrmse,coverage,users_evaluated,users_skipped\n";
  for (const auto& r : reports) {
    out << r.algorithm << ',' << r.similarity << ','
        << (r.neighborhood ? std::to_string(*r.neighborhood) : "") << ','
        << (r.threshold ? format_value(*r.threshold) : "") << ',' << format_value(r.train_ratio)
        << ',' << format_value(r.p_at_k) << ',' << format_value(r.recall) << ','
        << format_value(r.ndcg) << ',' << format_value(r.nmae) << ',' << format_value(r.nrmse)
        << ',' << format_value(r.coverage) << ',' << r.users_evaluated << ',' << r.users_skipped
        << '\n';
  }
}

}  // namespace venuerec
