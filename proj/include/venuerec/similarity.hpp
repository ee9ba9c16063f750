#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "venuerec/csv.hpp"
#include "venuerec/rating.hpp"

namespace venuerec {

enum class SimilarityKind { Cosine, Pearson, Euclidean, LogLikelihood };

inline std::string_view similarity_kind_name(SimilarityKind kind) {
  switch (kind) {
    case SimilarityKind::Cosine: return "cosine";
    case SimilarityKind::Pearson: return "pearson";
    case SimilarityKind::Euclidean: return "euclidean";
    case SimilarityKind::LogLikelihood: return "loglik";
  }
  return "unknown";
}

inline std::optional<SimilarityKind> parse_similarity_kind(std::string_view name) {
  if (name == "cosine") return SimilarityKind::Cosine;
  if (name == "pearson") return SimilarityKind::Pearson;
  if (name == "euclidean") return SimilarityKind::Euclidean;
  if (name == "loglik") return SimilarityKind::LogLikelihood;
  return std::nullopt;
}

struct SimilarityConfig {
  SimilarityKind kind = SimilarityKind::Euclidean;
  // Herlocker-style damping: scores with fewer than this many co-rated items
  // are scaled by overlap/threshold. Absent disables weighting. 50 is the
  // published default neighborhood-reliability cutoff.
  std::optional<int> significance_threshold;
  int min_overlap = 1;
};

using RatingRow = std::map<std::string, double>;

// Values at the keys present in both rows, in key order.
inline std::vector<std::pair<double, double>> co_rated_values(const RatingRow& a,
                                                              const RatingRow& b) {
  std::vector<std::pair<double, double>> out;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      out.emplace_back(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  return out;
}

inline std::size_t co_rated_count(const RatingRow& a, const RatingRow& b) {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) ++ia;
    else if (ib->first < ia->first) ++ib;
    else { ++n; ++ia; ++ib; }
  }
  return n;
}

// Cosine of the two vectors restricted to their co-rated coordinates.
// Absent when the overlap is below min_overlap or a restricted norm is zero.
inline std::optional<double> cosine_similarity(const RatingRow& a, const RatingRow& b,
                                               int min_overlap = 1) {
  const auto co = co_rated_values(a, b);
  if (co.empty() || co.size() < static_cast<std::size_t>(std::max(1, min_overlap)))
    return std::nullopt;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [x, y] : co) {
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

// Pearson correlation over the co-rated set, with both means taken over that
// set. Absent for overlap < 2, constant ratings, or overlap < min_overlap.
inline std::optional<double> pearson_similarity(const RatingRow& a, const RatingRow& b,
                                                int min_overlap = 1) {
  const auto co = co_rated_values(a, b);
  if (co.size() < 2 || co.size() < static_cast<std::size_t>(std::max(1, min_overlap)))
    return std::nullopt;
  double mean_a = 0.0, mean_b = 0.0;
  for (const auto& [x, y] : co) {
    mean_a += x;
    mean_b += y;
  }
  mean_a /= static_cast<double>(co.size());
  mean_b /= static_cast<double>(co.size());
  double num = 0.0, va = 0.0, vb = 0.0;
  for (const auto& [x, y] : co) {
    const double dx = x - mean_a;
    const double dy = y - mean_b;
    num += dx * dy;
    va += dx * dx;
    vb += dy * dy;
  }
  if (va == 0.0 || vb == 0.0) return std::nullopt;
  return std::clamp(num / (std::sqrt(va) * std::sqrt(vb)), -1.0, 1.0);
}

// Root-mean-square distance over the co-rated set mapped through 1/(1+d),
// so the result lies in (0, 1] with 1 for identical restrictions.
inline std::optional<double> euclidean_similarity(const RatingRow& a, const RatingRow& b,
                                                  int min_overlap = 1) {
  const auto co = co_rated_values(a, b);
  if (co.empty() || co.size() < static_cast<std::size_t>(std::max(1, min_overlap)))
    return std::nullopt;
  double sq = 0.0;
  for (const auto& [x, y] : co) sq += (x - y) * (x - y);
  const double d = std::sqrt(sq / static_cast<double>(co.size()));
  return 1.0 / (1.0 + d);
}

// Dunning's log-likelihood ratio statistic G^2 for a 2x2 contingency table,
// in nats: 2 * (H(row sums) + H(col sums) - H(cells)) with the unnormalized
// entropy H(a, b, ...) = xlogx(sum) - sum of xlogx(parts).
inline double log_likelihood_ratio(long long k11, long long k12, long long k21, long long k22) {
  if (k11 < 0 || k12 < 0 || k21 < 0 || k22 < 0)
    throw std::invalid_argument("contingency counts must be non-negative");
  auto xlogx = [](long long x) {
    return x > 0 ? static_cast<double>(x) * std::log(static_cast<double>(x)) : 0.0;
  };
  auto entropy2 = [&](long long a, long long b) { return xlogx(a + b) - xlogx(a) - xlogx(b); };
  const double row = entropy2(k11 + k12, k21 + k22);
  const double col = entropy2(k11 + k21, k12 + k22);
  const double cells =
      xlogx(k11 + k12 + k21 + k22) - xlogx(k11) - xlogx(k12) - xlogx(k21) - xlogx(k22);
  if (row + col < cells) return 0.0;  // round-off
  return 2.0 * (row + col - cells);
}

// Boolean-axis similarity: 1 - 1/(1 + G^2) over the co-occurrence table of
// the two rated sets against a universe of universe_size items. Zero when
// the sets are disjoint.
inline double log_likelihood_similarity(const RatingRow& a, const RatingRow& b,
                                        std::size_t universe_size) {
  const long long k11 = static_cast<long long>(co_rated_count(a, b));
  const long long k12 = static_cast<long long>(a.size()) - k11;
  const long long k21 = static_cast<long long>(b.size()) - k11;
  const long long unioned = k11 + k12 + k21;
  if (static_cast<long long>(universe_size) < unioned)
    throw std::invalid_argument("universe smaller than the union of rated sets");
  if (k11 == 0) return 0.0;
  const double g2 = log_likelihood_ratio(k11, k12, k21, static_cast<long long>(universe_size) - unioned);
  return 1.0 - 1.0 / (1.0 + g2);
}

// Scales a similarity by overlap/threshold below the threshold and leaves it
// unchanged at or above it.
inline double apply_significance(double sim, long long overlap, int threshold) {
  if (threshold < 1) throw std::invalid_argument("significance threshold must be >= 1");
  if (overlap < 0) throw std::invalid_argument("overlap must be non-negative");
  return sim * std::min(1.0, static_cast<double>(overlap) / static_cast<double>(threshold));
}

enum class SimilarityAxis { UserUser, ItemItem };

// Symmetric pairwise scores with co-rated counts, keyed by the ordered id
// pair. Pairs whose similarity is absent are simply not stored.
class SimilarityModel {
 public:
  struct Entry {
    double score = 0.0;
    int overlap = 0;
  };

  SimilarityModel(SimilarityAxis axis, SimilarityKind kind) : axis_(axis), kind_(kind) {}

  SimilarityAxis axis() const { return axis_; }
  SimilarityKind kind() const { return kind_; }
  std::size_t size() const { return entries_.size(); }

  void insert(const std::string& a, const std::string& b, double score, int overlap) {
    if (a == b) throw std::invalid_argument("self-similarity is not stored");
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    entries_[std::move(key)] = Entry{score, overlap};
  }

  void erase(const std::string& a, const std::string& b) {
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    entries_.erase(key);
  }

  std::optional<double> score(const std::string& a, const std::string& b) const {
    auto e = entry(a, b);
    if (!e) return std::nullopt;
    return e->score;
  }

  std::optional<Entry> entry(const std::string& a, const std::string& b) const {
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  const std::map<std::pair<std::string, std::string>, Entry>& entries() const { return entries_; }

  void write_csv(std::ostream& out) const {
    out << "id_a,id_b,kind,overlap,score\n";
    for (const auto& [key, e] : entries_)
      out << csv_escape(key.first) << ',' << csv_escape(key.second) << ','
          << similarity_kind_name(kind_) << ',' << e.overlap << ',' << format_value(e.score)
          << '\n';
  }

 private:
  SimilarityAxis axis_;
  SimilarityKind kind_;
  std::map<std::pair<std::string, std::string>, Entry> entries_;
};

// Computes all pairwise similarities along one axis of the matrix. Pairs are
// found through the inverted index, so only pairs with at least one co-rated
// item are ever visited.
inline SimilarityModel build_similarity(const RatingMatrix& matrix, SimilarityAxis axis,
                                        const SimilarityConfig& config) {
  if (config.significance_threshold && *config.significance_threshold < 1)
    throw std::invalid_argument("significance threshold must be >= 1");
  if (config.min_overlap < 0) throw std::invalid_argument("min_overlap must be non-negative");
  if (config.kind == SimilarityKind::LogLikelihood && !matrix.is_boolean())
    throw std::invalid_argument("log-likelihood similarity requires a Boolean rating matrix");

  const bool user_axis = axis == SimilarityAxis::UserUser;
  const auto& primary = user_axis ? matrix.rows() : matrix.columns();
  const auto& inverted = user_axis ? matrix.columns() : matrix.rows();
  const std::size_t universe = user_axis ? matrix.n_venues() : matrix.n_users();

  std::map<std::pair<std::string, std::string>, int> overlap;
  for (const auto& [key, members] : inverted) {
    (void)key;
    for (auto ia = members.begin(); ia != members.end(); ++ia) {
      auto ib = ia;
      for (++ib; ib != members.end(); ++ib) ++overlap[{ia->first, ib->first}];
    }
  }

  SimilarityModel model(axis, config.kind);
  const int needed = std::max(1, config.min_overlap);
  for (const auto& [pair, n] : overlap) {
    if (n < needed) continue;
    const RatingRow& ra = primary.at(pair.first);
    const RatingRow& rb = primary.at(pair.second);
    std::optional<double> sim;
    switch (config.kind) {
      case SimilarityKind::Cosine: sim = cosine_similarity(ra, rb, config.min_overlap); break;
      case SimilarityKind::Pearson: sim = pearson_similarity(ra, rb, config.min_overlap); break;
      case SimilarityKind::Euclidean: sim = euclidean_similarity(ra, rb, config.min_overlap); break;
      case SimilarityKind::LogLikelihood:
        sim = log_likelihood_similarity(ra, rb, universe);
        break;
    }
    if (!sim) continue;
    double value = *sim;
    if (config.significance_threshold)
      value = apply_significance(value, n, *config.significance_threshold);
    model.insert(pair.first, pair.second, value, n);
  }
  return model;
}

}  // namespace venuerec
