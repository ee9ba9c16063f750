#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "venuerec/corpus.hpp"
#include "venuerec/csv.hpp"

namespace venuerec {

enum class RatingMode { Pvr, Boolean };

// Personal venue rating: sum over active years of i * ln(count_i + 1),
// where i = 1 is the pair's earliest year. Gap years contribute ln(1) = 0,
// so iterating only the present entries is exact. Natural log throughout;
// any other base rescales every rating by the same constant.
inline double pvr_rating(const VenueYearCounts& counts) {
  double total = 0.0;
  for (const auto& [index, n] : counts.counts)
    total += static_cast<double>(index) * std::log1p(static_cast<double>(n));
  return total;
}

// Sparse researcher x venue matrix. Absence means unrated; zero values are
// rejected so presence always carries information. Means, range, and the
// global mean are maintained incrementally and match the stored ratings.
class RatingMatrix {
 public:
  using Row = std::map<VenueId, double>;
  using Column = std::map<ResearcherId, double>;

  void add(const ResearcherId& user, const VenueId& venue, double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("rating must be finite");
    if (value == 0.0)
      throw std::invalid_argument("zero rating for (" + user + ", " + venue +
                                  "); absence already means unrated");
    auto [it, inserted] = rows_[user].emplace(venue, value);
    (void)it;
    if (!inserted)
      throw std::invalid_argument("duplicate rating for (" + user + ", " + venue + ")");
    cols_[venue].emplace(user, value);
    ++count_;
    min_ = count_ == 1 ? value : std::min(min_, value);
    max_ = count_ == 1 ? value : std::max(max_, value);
  }

  bool empty() const { return count_ == 0; }
  std::size_t size() const { return count_; }
  std::size_t n_users() const { return rows_.size(); }
  std::size_t n_venues() const { return cols_.size(); }

  bool contains_user(const ResearcherId& u) const { return rows_.count(u) != 0; }
  bool contains_venue(const VenueId& v) const { return cols_.count(v) != 0; }

  std::optional<double> get(const ResearcherId& u, const VenueId& v) const {
    auto r = rows_.find(u);
    if (r == rows_.end()) return std::nullopt;
    auto c = r->second.find(v);
    if (c == r->second.end()) return std::nullopt;
    return c->second;
  }

  const Row& row(const ResearcherId& u) const {
    static const Row kEmpty;
    auto it = rows_.find(u);
    return it == rows_.end() ? kEmpty : it->second;
  }

  const Column& column(const VenueId& v) const {
    static const Column kEmpty;
    auto it = cols_.find(v);
    return it == cols_.end() ? kEmpty : it->second;
  }

  const std::map<ResearcherId, Row>& rows() const { return rows_; }
  const std::map<VenueId, Column>& columns() const { return cols_; }

  // Means are summed in key order so they are exact functions of the stored
  // cells, independent of insertion order.
  std::optional<double> user_mean(const ResearcherId& u) const {
    auto it = rows_.find(u);
    if (it == rows_.end()) return std::nullopt;
    return mean_of(it->second);
  }

  std::optional<double> venue_mean(const VenueId& v) const {
    auto it = cols_.find(v);
    if (it == cols_.end()) return std::nullopt;
    return mean_of(it->second);
  }

  std::optional<double> global_mean() const {
    if (count_ == 0) return std::nullopt;
    double sum = 0.0;
    for (const auto& [u, row] : rows_) {
      (void)u;
      for (const auto& [v, value] : row) {
        (void)v;
        sum += value;
      }
    }
    return sum / static_cast<double>(count_);
  }

  std::optional<double> min_rating() const {
    if (count_ == 0) return std::nullopt;
    return min_;
  }
  std::optional<double> max_rating() const {
    if (count_ == 0) return std::nullopt;
    return max_;
  }

  double clamp(double value) const {
    if (count_ == 0) return value;
    return std::clamp(value, min_, max_);
  }

  bool is_boolean() const { return count_ > 0 && min_ == 1.0 && max_ == 1.0; }

  // Same support, every value 1.0 (the Boolean baseline's view of the data).
  RatingMatrix booleanized() const {
    RatingMatrix out;
    for (const auto& [u, row] : rows_)
      for (const auto& [v, value] : row) {
        (void)value;
        out.add(u, v, 1.0);
      }
    return out;
  }

  void write_csv(std::ostream& out) const {
    out << "researcher,venue,value\n";
    for (const auto& [u, row] : rows_)
      for (const auto& [v, value] : row)
        out << csv_escape(u) << ',' << csv_escape(v) << ',' << format_value(value) << '\n';
  }

  static RatingMatrix read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw CsvError(1, "missing header row");
    detail::strip_cr(line);
    if (line != "researcher,venue,value")
      throw CsvError(1, "expected header 'researcher,venue,value', got '" + line + "'");
    RatingMatrix m;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      detail::strip_cr(line);
      auto fields = split_csv_record(line);
      if (!fields) throw CsvError(line_no, "malformed CSV quoting");
      if (fields->size() != 3)
        throw CsvError(line_no, "expected 3 fields, got " + std::to_string(fields->size()));
      if ((*fields)[0].empty() || (*fields)[1].empty())
        throw CsvError(line_no, "empty researcher or venue id");
      const std::string& raw = (*fields)[2];
      double value = 0.0;
      auto res = std::from_chars(raw.data(), raw.data() + raw.size(), value);
      if (res.ec != std::errc{} || res.ptr != raw.data() + raw.size())
        throw CsvError(line_no, "invalid rating value '" + raw + "'");
      try {
        m.add((*fields)[0], (*fields)[1], value);
      } catch (const std::invalid_argument& e) {
        throw CsvError(line_no, e.what());
      }
    }
    return m;
  }

 private:
  template <typename Map>
  static double mean_of(const Map& entries) {
    double sum = 0.0;
    for (const auto& [key, value] : entries) {
      (void)key;
      sum += value;
    }
    return sum / static_cast<double>(entries.size());
  }

  std::map<ResearcherId, Row> rows_;
  std::map<VenueId, Column> cols_;
  double min_ = 0.0;
  double max_ = 0.0;
  std::size_t count_ = 0;
};

// Assembles the rating matrix from aggregated counts. PVR mode stores the
// weighted-log rating, Boolean mode stores 1.0 per pair.
inline RatingMatrix build_matrix(const std::vector<VenueYearCounts>& counts, RatingMode mode) {
  std::vector<const VenueYearCounts*> ordered;
  ordered.reserve(counts.size());
  for (const auto& c : counts) ordered.push_back(&c);
  std::sort(ordered.begin(), ordered.end(), [](const VenueYearCounts* a, const VenueYearCounts* b) {
    return std::tie(a->researcher, a->venue) < std::tie(b->researcher, b->venue);
  });
  RatingMatrix m;
  for (const VenueYearCounts* c : ordered)
    m.add(c->researcher, c->venue, mode == RatingMode::Pvr ? pvr_rating(*c) : 1.0);
  return m;
}

}  // namespace venuerec
