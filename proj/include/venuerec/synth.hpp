#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "venuerec/corpus.hpp"

namespace venuerec {

// Seeded posting-log generator with planted community structure. Users and
// venues are assigned to communities round-robin so membership is a pure
// function of the id index.
struct SynthConfig {
  int n_users = 100;
  int n_venues = 40;
  int n_communities = 4;
  double in_community_affinity = 0.9;
  int min_postings = 10;
  int max_postings = 30;
  int start_year = 2008;
  int end_year = 2012;
  // Within-community taste structure. Zero keeps the in-community draw
  // uniform. A positive skew blends two opposing venue-weight profiles,
  // (k+1)^-skew and (V-k)^-skew over the community's k-indexed venues, with
  // a per-user mixing coefficient that runs from 0 to 1 across the
  // community's members. Neighboring users then share posting-intensity
  // patterns that aggregate venue popularity does not reveal.
  double venue_weight_skew = 0.0;
  std::uint64_t rng_seed = 1;

  void validate() const {
    if (n_users < 1 || n_venues < 1 || n_communities < 1)
      throw std::invalid_argument("users, venues, and communities must be positive");
    if (n_communities > std::min(n_users, n_venues))
      throw std::invalid_argument("more communities than users or venues");
    if (!(in_community_affinity > 0.0) || in_community_affinity > 1.0)
      throw std::invalid_argument("affinity must lie in (0, 1]");
    if (min_postings < 1 || max_postings < min_postings)
      throw std::invalid_argument("posting count range is invalid");
    if (start_year > end_year || start_year < 1000 || end_year > 9999)
      throw std::invalid_argument("year span is invalid");
    if (venue_weight_skew < 0.0)
      throw std::invalid_argument("venue weight skew must be non-negative");
  }
};

namespace detail {
inline std::string synth_id(char prefix, int width, long long n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*lld", prefix, width, n);
  return buf;
}
}  // namespace detail

// Each user draws a posting count, then per posting picks an own-community
// venue with probability affinity (otherwise any venue uniformly) and a
// uniform date in the year span. Article keys are globally unique, and the
// single sequential RNG stream makes the output a pure function of the seed.
inline std::vector<Posting> generate_corpus(const SynthConfig& config) {
  config.validate();
  using std::chrono::days;
  using std::chrono::sys_days;
  using std::chrono::year;
  using std::chrono::year_month_day;

  std::vector<std::vector<int>> community_venues(static_cast<std::size_t>(config.n_communities));
  for (int v = 0; v < config.n_venues; ++v)
    community_venues[static_cast<std::size_t>(v % config.n_communities)].push_back(v);

  const sys_days first_day{year{config.start_year} / 1 / 1};
  const sys_days last_day{year{config.end_year} / 12 / 31};
  const long long span_days = (last_day - first_day).count() + 1;

  std::mt19937_64 rng(config.rng_seed);
  std::uniform_int_distribution<int> posting_count(config.min_postings, config.max_postings);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> any_venue(0, config.n_venues - 1);
  std::uniform_int_distribution<long long> day_offset(0, span_days - 1);

  std::vector<int> community_size(static_cast<std::size_t>(config.n_communities), 0);
  for (int u = 0; u < config.n_users; ++u)
    ++community_size[static_cast<std::size_t>(u % config.n_communities)];

  auto own_venue_weights = [&](std::size_t community, int member_index) {
    const auto& venues = community_venues[community];
    const int members = community_size[community];
    const double mix =
        members > 1 ? static_cast<double>(member_index) / static_cast<double>(members - 1) : 0.5;
    const double v = static_cast<double>(venues.size());
    std::vector<double> weights(venues.size());
    for (std::size_t k = 0; k < venues.size(); ++k)
      weights[k] = (1.0 - mix) * std::pow(static_cast<double>(k + 1), -config.venue_weight_skew) +
                   mix * std::pow(v - static_cast<double>(k), -config.venue_weight_skew);
    return weights;
  };

  std::vector<Posting> postings;
  long long article = 0;
  for (int u = 0; u < config.n_users; ++u) {
    const std::size_t community = static_cast<std::size_t>(u % config.n_communities);
    const auto& own = community_venues[community];
    const auto weights = own_venue_weights(community, u / config.n_communities);
    std::discrete_distribution<int> own_venue(weights.begin(), weights.end());
    const int count = posting_count(rng);
    for (int p = 0; p < count; ++p) {
      const int venue = unit(rng) < config.in_community_affinity
                            ? own[static_cast<std::size_t>(own_venue(rng))]
                            : any_venue(rng);
      const year_month_day ymd{first_day + days{day_offset(rng)}};
      Posting posting;
      posting.researcher = detail::synth_id('u', 4, u + 1);
      posting.article = detail::synth_id('a', 7, ++article);
      posting.venue = detail::synth_id('v', 4, venue + 1);
      posting.added_date = Date{static_cast<int>(ymd.year()),
                                static_cast<int>(static_cast<unsigned>(ymd.month())),
                                static_cast<int>(static_cast<unsigned>(ymd.day()))};
      postings.push_back(std::move(posting));
    }
  }
  return postings;
}

// Community of a generated id, for tests that check the planted structure.
inline int synth_community(const std::string& id, int n_communities) {
  return static_cast<int>((std::stoll(id.substr(1)) - 1) % n_communities);
}

}  // namespace venuerec
