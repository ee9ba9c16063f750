#pragma once

#include <charconv>
#include <chrono>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "venuerec/csv.hpp"

namespace venuerec {

using ResearcherId = std::string;
using VenueId = std::string;

struct Date {
  int year = 0;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  std::string to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
  }
};

// Strict ISO-8601 YYYY-MM-DD with a 4-digit year and calendar validity.
inline std::optional<Date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto num = [&](std::size_t pos, std::size_t len, int& out) {
    auto res = std::from_chars(s.data() + pos, s.data() + pos + len, out);
    return res.ec == std::errc{} && res.ptr == s.data() + pos + len;
  };
  Date d;
  if (!num(0, 4, d.year) || !num(5, 2, d.month) || !num(8, 2, d.day)) return std::nullopt;
  if (d.year < 1000 || d.year > 9999) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{d.year},
                                        std::chrono::month{static_cast<unsigned>(d.month)},
                                        std::chrono::day{static_cast<unsigned>(d.day)}};
  if (!ymd.ok()) return std::nullopt;
  return d;
}

// One library event: a researcher bookmarked an article from a venue.
struct Posting {
  ResearcherId researcher;
  std::string article;
  VenueId venue;
  Date added_date;

  bool operator==(const Posting&) const = default;
};

// Per-(researcher, venue) reference counts keyed by 1-based year index.
// Index 1 is the earliest year with activity for the pair, span_years the
// most recent; gap years are implicit zeros.
struct VenueYearCounts {
  ResearcherId researcher;
  VenueId venue;
  std::map<int, long long> counts;
  int span_years = 0;
};

class CsvError : public std::runtime_error {
 public:
  CsvError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct ParseStats {
  std::size_t rows = 0;                  // data rows read (excluding header)
  std::size_t duplicates_dropped = 0;    // repeated (researcher, article) pairs
  std::size_t missing_venue_dropped = 0; // rows with an empty venue field
};

struct ParseResult {
  std::vector<Posting> postings;
  ParseStats stats;
};

inline constexpr std::string_view kPostingCsvHeader = "researcher,article,venue,added_date";

namespace detail {
inline void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}
inline bool has_whitespace(std::string_view s) {
  return s.find_first_of(" \t\v\f\r\n") != std::string_view::npos;
}
}  // namespace detail

// Reads the posting CSV. A (researcher, article) pair is kept once: the
// earliest-dated instance wins, at the position of its first appearance.
// Rows with an empty venue are dropped and counted.
inline ParseResult parse_postings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw CsvError(1, "missing header row");
  detail::strip_cr(line);
  if (line != kPostingCsvHeader)
    throw CsvError(1, "expected header '" + std::string(kPostingCsvHeader) + "', got '" + line + "'");

  ParseResult result;
  std::map<std::pair<ResearcherId, std::string>, std::size_t> kept;  // -> index in postings
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    auto fields = split_csv_record(line);
    if (!fields) throw CsvError(line_no, "malformed CSV quoting");
    if (fields->size() != 4)
      throw CsvError(line_no, "expected 4 fields, got " + std::to_string(fields->size()));
    ++result.stats.rows;

    const std::string& researcher = (*fields)[0];
    const std::string& article = (*fields)[1];
    const std::string& venue = (*fields)[2];
    if (researcher.empty() || detail::has_whitespace(researcher))
      throw CsvError(line_no, "invalid researcher id '" + researcher + "'");
    if (article.empty()) throw CsvError(line_no, "empty article key");
    auto date = parse_date((*fields)[3]);
    if (!date) throw CsvError(line_no, "invalid date '" + (*fields)[3] + "'");
    if (venue.empty()) {
      ++result.stats.missing_venue_dropped;
      continue;
    }

    auto key = std::make_pair(researcher, article);
    auto it = kept.find(key);
    if (it != kept.end()) {
      ++result.stats.duplicates_dropped;
      Posting& existing = result.postings[it->second];
      if (*date < existing.added_date) {
        existing.venue = venue;
        existing.added_date = *date;
      }
      continue;
    }
    kept.emplace(std::move(key), result.postings.size());
    result.postings.push_back(Posting{researcher, article, venue, *date});
  }
  return result;
}

inline void write_postings_csv(std::ostream& out, const std::vector<Posting>& postings) {
  out << kPostingCsvHeader << '\n';
  for (const auto& p : postings) {
    out << csv_escape(p.researcher) << ',' << csv_escape(p.article) << ','
        << csv_escape(p.venue) << ',' << p.added_date.to_string() << '\n';
  }
}

// Groups postings into per-(researcher, venue) year counts. The year index
// i of a posting is calendar_year - first_year + 1; span_years covers the
// inclusive first..last range so gap years read as zero.
inline std::vector<VenueYearCounts> aggregate(const std::vector<Posting>& postings) {
  std::map<std::pair<ResearcherId, VenueId>, std::map<int, long long>> by_pair;
  for (const auto& p : postings) ++by_pair[{p.researcher, p.venue}][p.added_date.year];

  std::vector<VenueYearCounts> out;
  out.reserve(by_pair.size());
  for (const auto& [key, years] : by_pair) {
    const int first = years.begin()->first;
    const int last = years.rbegin()->first;
    VenueYearCounts c;
    c.researcher = key.first;
    c.venue = key.second;
    c.span_years = last - first + 1;
    for (const auto& [year, n] : years) c.counts[year - first + 1] = n;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace venuerec
