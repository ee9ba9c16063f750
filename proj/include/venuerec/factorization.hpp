#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "venuerec/rating.hpp"

namespace venuerec {

enum class FactorVariant { Sgd, Svdpp };

inline std::string_view factor_variant_name(FactorVariant v) {
  return v == FactorVariant::Sgd ? "sgd" : "svdpp";
}

inline std::optional<FactorVariant> parse_factor_variant(std::string_view name) {
  if (name == "sgd") return FactorVariant::Sgd;
  if (name == "svdpp") return FactorVariant::Svdpp;
  return std::nullopt;
}

// Standard published SVD++ settings. Factors start uniform in
// [-0.05, 0.05], biases at zero, the learning rate is held constant.
struct TrainConfig {
  int factors = 32;
  double learning_rate = 0.005;
  double regularization = 0.02;
  int epochs = 30;
  std::uint64_t rng_seed = 1;
  FactorVariant variant = FactorVariant::Sgd;

  void validate() const {
    if (factors < 1) throw std::invalid_argument("factors must be >= 1");
    if (!(learning_rate > 0.0) || learning_rate > 1.0)
      throw std::invalid_argument("learning_rate must lie in (0, 1]");
    if (regularization < 0.0) throw std::invalid_argument("regularization must be >= 0");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  }
};

// Biased factor model r = mu + b_u + b_i + q_i . z_u, where z_u is the user
// factor alone (SGD) or augmented with |N(u)|^{-1/2} * sum of the implicit
// item factors over the user's rated venues (SVD++).
class FactorModel {
 public:
  using Vec = std::vector<double>;

  double global_mean() const { return global_mean_; }
  double min_rating() const { return min_; }
  double max_rating() const { return max_; }
  const TrainConfig& config() const { return config_; }
  const std::vector<double>& epoch_objectives() const { return epoch_objectives_; }

  const std::map<ResearcherId, double>& user_biases() const { return user_bias_; }
  const std::map<VenueId, double>& item_biases() const { return item_bias_; }
  const std::map<ResearcherId, Vec>& user_factors() const { return user_factor_; }
  const std::map<VenueId, Vec>& item_factors() const { return item_factor_; }
  const std::map<VenueId, Vec>& implicit_factors() const { return implicit_factor_; }
  const std::map<ResearcherId, std::vector<VenueId>>& rated_items() const { return rated_items_; }

  void set_user_bias(const ResearcherId& u, double b) { user_bias_[u] = b; }
  void set_item_bias(const VenueId& v, double b) { item_bias_[v] = b; }
  void set_user_factor(const ResearcherId& u, Vec p) { user_factor_[u] = std::move(p); }
  void set_item_factor(const VenueId& v, Vec q) { item_factor_[v] = std::move(q); }
  void set_implicit_factor(const VenueId& v, Vec y) { implicit_factor_[v] = std::move(y); }

  // p_u plus the scaled implicit-feedback sum for SVD++; empty implicit sets
  // reduce this to p_u, i.e. the plain SGD formula.
  Vec user_representation(const ResearcherId& u) const {
    Vec z = user_factor_.at(u);
    if (config_.variant == FactorVariant::Svdpp) {
      auto it = rated_items_.find(u);
      if (it != rated_items_.end() && !it->second.empty()) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(it->second.size()));
        Vec sum(z.size(), 0.0);
        for (const VenueId& j : it->second) {
          const Vec& y = implicit_factor_.at(j);
          for (std::size_t k = 0; k < z.size(); ++k) sum[k] += y[k];
        }
        for (std::size_t k = 0; k < z.size(); ++k) z[k] += scale * sum[k];
      }
    }
    return z;
  }

  // Model formula with unknown bias/factor terms dropped, so a fully unknown
  // pair falls back to the global mean. No clamping.
  double predict_unclamped(const ResearcherId& u, const VenueId& v) const {
    double r = global_mean_;
    if (auto it = user_bias_.find(u); it != user_bias_.end()) r += it->second;
    if (auto it = item_bias_.find(v); it != item_bias_.end()) r += it->second;
    auto q = item_factor_.find(v);
    if (q != item_factor_.end() && user_factor_.count(u)) {
      const Vec z = user_representation(u);
      double dot = 0.0;
      for (std::size_t k = 0; k < z.size(); ++k) dot += q->second[k] * z[k];
      r += dot;
    }
    return r;
  }

  double predict(const ResearcherId& u, const VenueId& v) const {
    return std::clamp(predict_unclamped(u, v), min_, max_);
  }

  void save(std::ostream& out) const {
    nlohmann::json j;
    j["format"] = "venuerec-factor-model";
    j["version"] = 1;
    j["config"] = {{"factors", config_.factors},
                   {"learning_rate", config_.learning_rate},
                   {"regularization", config_.regularization},
                   {"epochs", config_.epochs},
                   {"rng_seed", config_.rng_seed},
                   {"variant", std::string(factor_variant_name(config_.variant))}};
    j["global_mean"] = global_mean_;
    j["min_rating"] = min_;
    j["max_rating"] = max_;
    j["user_biases"] = user_bias_;
    j["item_biases"] = item_bias_;
    j["user_factors"] = user_factor_;
    j["item_factors"] = item_factor_;
    j["implicit_factors"] = implicit_factor_;
    j["rated_items"] = rated_items_;
    out << j.dump(2) << '\n';
  }

  static FactorModel load(std::istream& in) {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(std::string("invalid model file: ") + e.what());
    }
    if (j.value("format", "") != "venuerec-factor-model" || j.value("version", 0) != 1)
      throw std::runtime_error("invalid model file: unrecognized format or version");
    FactorModel m;
    const auto& c = j.at("config");
    m.config_.factors = c.at("factors").get<int>();
    m.config_.learning_rate = c.at("learning_rate").get<double>();
    m.config_.regularization = c.at("regularization").get<double>();
    m.config_.epochs = c.at("epochs").get<int>();
    m.config_.rng_seed = c.at("rng_seed").get<std::uint64_t>();
    auto variant = parse_factor_variant(c.at("variant").get<std::string>());
    if (!variant) throw std::runtime_error("invalid model file: unknown variant");
    m.config_.variant = *variant;
    m.global_mean_ = j.at("global_mean").get<double>();
    m.min_ = j.at("min_rating").get<double>();
    m.max_ = j.at("max_rating").get<double>();
    m.user_bias_ = j.at("user_biases").get<std::map<ResearcherId, double>>();
    m.item_bias_ = j.at("item_biases").get<std::map<VenueId, double>>();
    m.user_factor_ = j.at("user_factors").get<std::map<ResearcherId, Vec>>();
    m.item_factor_ = j.at("item_factors").get<std::map<VenueId, Vec>>();
    m.implicit_factor_ = j.at("implicit_factors").get<std::map<VenueId, Vec>>();
    m.rated_items_ = j.at("rated_items").get<std::map<ResearcherId, std::vector<VenueId>>>();
    const std::size_t f = static_cast<std::size_t>(m.config_.factors);
    for (const auto& [id, vec] : m.user_factor_)
      if (vec.size() != f) throw std::runtime_error("invalid model file: bad factor length for " + id);
    for (const auto& [id, vec] : m.item_factor_)
      if (vec.size() != f) throw std::runtime_error("invalid model file: bad factor length for " + id);
    for (const auto& [id, vec] : m.implicit_factor_)
      if (vec.size() != f) throw std::runtime_error("invalid model file: bad factor length for " + id);
    return m;
  }

 private:
  friend FactorModel train_factor_model(const RatingMatrix&, const TrainConfig&);

  TrainConfig config_{};
  double global_mean_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
  std::map<ResearcherId, double> user_bias_;
  std::map<VenueId, double> item_bias_;
  std::map<ResearcherId, Vec> user_factor_;
  std::map<VenueId, Vec> item_factor_;
  std::map<VenueId, Vec> implicit_factor_;
  std::map<ResearcherId, std::vector<VenueId>> rated_items_;
  std::vector<double> epoch_objectives_;
};

// Per-sample regularized loss the trainer descends:
//   0.5 * (e^2 + reg * (b_u^2 + b_i^2 + |p_u|^2 + |q_i|^2 + sum_j |y_j|^2))
// with the y_j sum over the user's implicit set (SVD++ only).
inline double sample_loss(const FactorModel& model, const ResearcherId& u, const VenueId& v,
                          double rating) {
  if (!model.user_factors().count(u)) throw std::invalid_argument("unknown researcher: " + u);
  if (!model.item_factors().count(v)) throw std::invalid_argument("unknown venue: " + v);
  const double e = rating - model.predict_unclamped(u, v);
  const double reg = model.config().regularization;
  auto sq_norm = [](const FactorModel::Vec& x) {
    double s = 0.0;
    for (double c : x) s += c * c;
    return s;
  };
  double penalty = model.user_biases().at(u) * model.user_biases().at(u) +
                   model.item_biases().at(v) * model.item_biases().at(v) +
                   sq_norm(model.user_factors().at(u)) + sq_norm(model.item_factors().at(v));
  if (model.config().variant == FactorVariant::Svdpp) {
    auto it = model.rated_items().find(u);
    if (it != model.rated_items().end())
      for (const VenueId& j : it->second) penalty += sq_norm(model.implicit_factors().at(j));
  }
  return 0.5 * (e * e + reg * penalty);
}

// Analytic gradients of sample_loss at the model's current parameters; a
// training step is exactly theta -= learning_rate * gradient.
struct SampleGradients {
  double user_bias = 0.0;
  double item_bias = 0.0;
  FactorModel::Vec user_factor;
  FactorModel::Vec item_factor;
  std::map<VenueId, FactorModel::Vec> implicit;  // SVD++ y_j gradients
};

inline SampleGradients sample_gradients(const FactorModel& model, const ResearcherId& u,
                                        const VenueId& v, double rating) {
  if (!model.user_factors().count(u)) throw std::invalid_argument("unknown researcher: " + u);
  if (!model.item_factors().count(v)) throw std::invalid_argument("unknown venue: " + v);
  const double e = rating - model.predict_unclamped(u, v);
  const double reg = model.config().regularization;
  const FactorModel::Vec& p = model.user_factors().at(u);
  const FactorModel::Vec& q = model.item_factors().at(v);
  const FactorModel::Vec z = model.user_representation(u);

  SampleGradients g;
  g.user_bias = -e + reg * model.user_biases().at(u);
  g.item_bias = -e + reg * model.item_biases().at(v);
  g.user_factor.resize(p.size());
  g.item_factor.resize(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    g.user_factor[k] = -e * q[k] + reg * p[k];
    g.item_factor[k] = -e * z[k] + reg * q[k];
  }
  if (model.config().variant == FactorVariant::Svdpp) {
    auto it = model.rated_items().find(u);
    if (it != model.rated_items().end() && !it->second.empty()) {
      const double scale = 1.0 / std::sqrt(static_cast<double>(it->second.size()));
      for (const VenueId& j : it->second) {
        const FactorModel::Vec& y = model.implicit_factors().at(j);
        FactorModel::Vec gy(p.size());
        for (std::size_t k = 0; k < p.size(); ++k) gy[k] = -e * scale * q[k] + reg * y[k];
        g.implicit[j] = std::move(gy);
      }
    }
  }
  return g;
}

// Trains by per-rating gradient steps, shuffling the rating list each epoch
// with the seeded generator. Sequential single-threaded updates are part of
// the determinism contract: one seed, one model.
inline FactorModel train_factor_model(const RatingMatrix& matrix, const TrainConfig& config) {
  config.validate();
  if (matrix.empty()) throw std::invalid_argument("cannot train on an empty rating matrix");

  std::vector<ResearcherId> users;
  users.reserve(matrix.n_users());
  for (const auto& [u, row] : matrix.rows()) {
    (void)row;
    users.push_back(u);
  }
  std::vector<VenueId> venues;
  venues.reserve(matrix.n_venues());
  for (const auto& [v, col] : matrix.columns()) {
    (void)col;
    venues.push_back(v);
  }
  std::map<ResearcherId, int> user_index;
  std::map<VenueId, int> venue_index;
  for (std::size_t i = 0; i < users.size(); ++i) user_index[users[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < venues.size(); ++i) venue_index[venues[i]] = static_cast<int>(i);

  const int f = config.factors;
  const bool svdpp = config.variant == FactorVariant::Svdpp;
  std::mt19937_64 rng(config.rng_seed);
  std::uniform_real_distribution<double> init(-0.05, 0.05);

  auto init_table = [&](std::size_t n) {
    std::vector<std::vector<double>> t(n, std::vector<double>(f));
    for (auto& vec : t)
      for (double& c : vec) c = init(rng);
    return t;
  };
  auto P = init_table(users.size());
  auto Q = init_table(venues.size());
  std::vector<std::vector<double>> Y;
  if (svdpp) Y = init_table(venues.size());
  std::vector<double> bu(users.size(), 0.0);
  std::vector<double> bi(venues.size(), 0.0);

  std::vector<std::tuple<int, int, double>> ratings;
  ratings.reserve(matrix.size());
  std::vector<std::vector<int>> rated(users.size());
  for (const auto& [u, row] : matrix.rows()) {
    const int ui = user_index[u];
    for (const auto& [v, r] : row) {
      const int vi = venue_index[v];
      ratings.emplace_back(ui, vi, r);
      rated[ui].push_back(vi);
    }
  }
  std::vector<double> implicit_scale(users.size(), 0.0);
  for (std::size_t ui = 0; ui < users.size(); ++ui)
    if (!rated[ui].empty()) implicit_scale[ui] = 1.0 / std::sqrt(static_cast<double>(rated[ui].size()));

  const double mu = *matrix.global_mean();
  const double lr = config.learning_rate;
  const double reg = config.regularization;

  std::vector<double> z(f), q_old(f);
  auto representation = [&](int ui) {
    const auto& p = P[ui];
    for (int k = 0; k < f; ++k) z[k] = p[k];
    if (svdpp) {
      const double scale = implicit_scale[ui];
      for (int vj : rated[ui]) {
        const auto& y = Y[vj];
        for (int k = 0; k < f; ++k) z[k] += scale * y[k];
      }
    }
  };

  std::vector<double> objectives;
  objectives.reserve(config.epochs);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(ratings.begin(), ratings.end(), rng);
    for (const auto& [ui, vi, r] : ratings) {
      representation(ui);
      double pred = mu + bu[ui] + bi[vi];
      for (int k = 0; k < f; ++k) pred += Q[vi][k] * z[k];
      const double e = r - pred;

      auto& p = P[ui];
      auto& q = Q[vi];
      for (int k = 0; k < f; ++k) {
        q_old[k] = q[k];
        q[k] += lr * (e * z[k] - reg * q[k]);
        p[k] += lr * (e * q_old[k] - reg * p[k]);
      }
      if (svdpp) {
        const double scale = implicit_scale[ui];
        for (int vj : rated[ui]) {
          auto& y = Y[vj];
          for (int k = 0; k < f; ++k) y[k] += lr * (e * scale * q_old[k] - reg * y[k]);
        }
      }
      bu[ui] += lr * (e - reg * bu[ui]);
      bi[vi] += lr * (e - reg * bi[vi]);
    }

    double objective = 0.0;
    for (const auto& [ui, vi, r] : ratings) {
      representation(ui);
      double pred = mu + bu[ui] + bi[vi];
      for (int k = 0; k < f; ++k) pred += Q[vi][k] * z[k];
      const double e = r - pred;
      objective += e * e;
    }
    double penalty = 0.0;
    for (double b : bu) penalty += b * b;
    for (double b : bi) penalty += b * b;
    for (const auto& vec : P)
      for (double c : vec) penalty += c * c;
    for (const auto& vec : Q)
      for (double c : vec) penalty += c * c;
    for (const auto& vec : Y)
      for (double c : vec) penalty += c * c;
    objective += reg * penalty;
    if (!std::isfinite(objective))
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch));
    objectives.push_back(objective);
  }

  FactorModel model;
  model.config_ = config;
  model.global_mean_ = mu;
  model.min_ = *matrix.min_rating();
  model.max_ = *matrix.max_rating();
  model.epoch_objectives_ = std::move(objectives);
  for (std::size_t i = 0; i < users.size(); ++i) {
    model.user_bias_[users[i]] = bu[i];
    model.user_factor_[users[i]] = std::move(P[i]);
    std::vector<VenueId> items;
    items.reserve(rated[i].size());
    for (int vj : rated[i]) items.push_back(venues[static_cast<std::size_t>(vj)]);
    model.rated_items_[users[i]] = std::move(items);
  }
  for (std::size_t i = 0; i < venues.size(); ++i) {
    model.item_bias_[venues[i]] = bi[i];
    model.item_factor_[venues[i]] = std::move(Q[i]);
    if (svdpp) model.implicit_factor_[venues[i]] = std::move(Y[i]);
  }
  return model;
}

}  // namespace venuerec
