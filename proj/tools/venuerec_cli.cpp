// Command-line driver for the venuerec library: synthetic corpus generation,
// ingest, factor-model training, recommendation, and offline evaluation.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "venuerec/venuerec.hpp"

namespace {

using namespace venuerec;

// Bad or unreadable input files; maps to exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw DataError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out.is_open()) throw DataError("cannot open '" + path + "' for writing");
  return out;
}

void ensure_distinct(const std::string& input, const std::string& output) {
  if (!output.empty() && input == output)
    throw std::invalid_argument("input and output paths must differ: '" + input + "'");
}

RatingMatrix load_matrix(const std::string& path) {
  auto in = open_input(path);
  return RatingMatrix::read_csv(in);
}

FactorModel load_model(const std::string& path) {
  auto in = open_input(path);
  try {
    return FactorModel::load(in);
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }
}

SimilarityKind similarity_from_flag(const std::string& name) {
  auto kind = parse_similarity_kind(name);
  if (!kind) throw std::invalid_argument("unknown similarity '" + name + "'");
  return *kind;
}

Algorithm algorithm_from_flag(const std::string& name) {
  auto algo = parse_algorithm(name);
  if (!algo) throw std::invalid_argument("unknown algorithm '" + name + "'");
  return *algo;
}

// Flags shared by every subcommand that builds a recommender.
struct AlgoFlags {
  std::string algorithm = "user_cf";
  std::string similarity = "euclidean";
  int k = 10;
  double threshold = -1.0;  // < 0 means the top-k mode
  int significance = 50;
  bool no_significance = false;
  int min_overlap = 1;
  bool infer_missing = false;
  TrainConfig train{};

  void attach(CLI::App* cmd, bool with_train = true) {
    cmd->add_option("--algorithm", algorithm, "user_cf, item_cf, sgd, svdpp, or baseline")
        ->capture_default_str();
    cmd->add_option("--similarity", similarity, "cosine, pearson, euclidean, or loglik")
        ->capture_default_str();
    auto* k_opt = cmd->add_option("--k", k, "Neighborhood size")->capture_default_str();
    cmd->add_option("--threshold", threshold, "Minimum neighbor similarity in [0,1]")
        ->excludes(k_opt);
    cmd->add_option("--significance", significance,
                    "Significance-weighting overlap threshold")
        ->capture_default_str();
    cmd->add_flag("--no-significance", no_significance, "Disable significance weighting");
    cmd->add_option("--min-overlap", min_overlap, "Minimum co-rated count for a similarity")
        ->capture_default_str();
    cmd->add_flag("--infer-missing", infer_missing,
                  "Fall back to average ratings when no neighbors exist");
    if (with_train) {
      cmd->add_option("--factors", train.factors, "Latent factors")->capture_default_str();
      cmd->add_option("--learning-rate", train.learning_rate, "SGD learning rate")
          ->capture_default_str();
      cmd->add_option("--regularization", train.regularization, "L2 regularization")
          ->capture_default_str();
      cmd->add_option("--epochs", train.epochs, "Training epochs")->capture_default_str();
    }
  }

  AlgoConfig to_config(bool threshold_given) const {
    AlgoConfig cfg;
    cfg.algorithm = algorithm_from_flag(algorithm);
    cfg.similarity.kind = similarity_from_flag(similarity);
    cfg.similarity.significance_threshold =
        no_significance ? std::nullopt : std::optional<int>(significance);
    cfg.similarity.min_overlap = min_overlap;
    cfg.policy = threshold_given ? NeighborhoodPolicy::min_similarity(threshold, infer_missing)
                                 : NeighborhoodPolicy::top_k(k, infer_missing);
    cfg.train = train;
    return cfg;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"venuerec: scholarly venue recommendation from reading activity"};
  app.require_subcommand(1);
  // TOML config with one section per subcommand, e.g. [sweep]; command-line
  // flags override config values.
  app.set_config("--config", "", "Read option defaults from a TOML file");

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic posting log");
  SynthConfig synth;
  std::string gen_out;
  gen->add_option("--users", synth.n_users)->capture_default_str();
  gen->add_option("--venues", synth.n_venues)->capture_default_str();
  gen->add_option("--communities", synth.n_communities)->capture_default_str();
  gen->add_option("--affinity", synth.in_community_affinity)->capture_default_str();
  gen->add_option("--min-postings", synth.min_postings)->capture_default_str();
  gen->add_option("--max-postings", synth.max_postings)->capture_default_str();
  gen->add_option("--start-year", synth.start_year)->capture_default_str();
  gen->add_option("--end-year", synth.end_year)->capture_default_str();
  gen->add_option("--seed", synth.rng_seed, "RNG seed")->required();
  gen->add_option("--out", gen_out, "Posting CSV to write")->required();
  gen->callback([&] {
    auto postings = generate_corpus(synth);
    auto out = open_output(gen_out);
    write_postings_csv(out, postings);
    std::cout << "postings=" << postings.size() << " users=" << synth.n_users
              << " venues=" << synth.n_venues << "\n";
  });

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Build a rating matrix from a posting log");
  std::string ingest_postings, ingest_out, ingest_mode = "pvr";
  ingest->add_option("--postings", ingest_postings, "Posting CSV")->required();
  ingest->add_option("--out", ingest_out, "Rating-matrix CSV to write")->required();
  ingest->add_option("--mode", ingest_mode, "pvr or boolean")->capture_default_str();
  ingest->callback([&] {
    ensure_distinct(ingest_postings, ingest_out);
    RatingMode mode;
    if (ingest_mode == "pvr") mode = RatingMode::Pvr;
    else if (ingest_mode == "boolean") mode = RatingMode::Boolean;
    else throw std::invalid_argument("unknown mode '" + ingest_mode + "'");
    auto in = open_input(ingest_postings);
    auto parsed = parse_postings(in);
    auto matrix = build_matrix(aggregate(parsed.postings), mode);
    auto out = open_output(ingest_out);
    matrix.write_csv(out);
    std::cout << "rows=" << parsed.stats.rows << " postings=" << parsed.postings.size()
              << " duplicates_dropped=" << parsed.stats.duplicates_dropped
              << " missing_venue_dropped=" << parsed.stats.missing_venue_dropped
              << " pairs=" << matrix.size() << " users=" << matrix.n_users()
              << " venues=" << matrix.n_venues() << "\n";
  });

  // train
  auto* train = app.add_subcommand("train", "Train a factorization model");
  std::string train_matrix_path, train_out, train_variant = "sgd";
  TrainConfig train_cfg;
  train->add_option("--matrix", train_matrix_path, "Rating-matrix CSV")->required();
  train->add_option("--variant", train_variant, "sgd or svdpp")->capture_default_str();
  train->add_option("--factors", train_cfg.factors)->capture_default_str();
  train->add_option("--learning-rate", train_cfg.learning_rate)->capture_default_str();
  train->add_option("--regularization", train_cfg.regularization)->capture_default_str();
  train->add_option("--epochs", train_cfg.epochs)->capture_default_str();
  train->add_option("--seed", train_cfg.rng_seed, "RNG seed")->required();
  train->add_option("--out", train_out, "Model file to write")->required();
  train->callback([&] {
    ensure_distinct(train_matrix_path, train_out);
    auto variant = parse_factor_variant(train_variant);
    if (!variant) throw std::invalid_argument("unknown variant '" + train_variant + "'");
    train_cfg.variant = *variant;
    auto matrix = load_matrix(train_matrix_path);
    auto model = train_factor_model(matrix, train_cfg);
    auto out = open_output(train_out);
    model.save(out);
    std::cout << "ratings=" << matrix.size() << " epochs=" << train_cfg.epochs
              << " final_objective=" << format_value(model.epoch_objectives().back()) << "\n";
  });

  // predict
  auto* predict = app.add_subcommand("predict", "Predict one rating from a trained model");
  std::string predict_model, predict_user, predict_venue;
  predict->add_option("--model", predict_model, "Model file")->required();
  predict->add_option("--user", predict_user)->required();
  predict->add_option("--venue", predict_venue)->required();
  predict->callback([&] {
    auto model = load_model(predict_model);
    std::cout << "researcher,venue,predicted\n"
              << csv_escape(predict_user) << ',' << csv_escape(predict_venue) << ','
              << format_value(model.predict(predict_user, predict_venue)) << "\n";
  });

  // recommend
  auto* rec = app.add_subcommand("recommend", "Rank unrated venues for one researcher");
  std::string rec_matrix_path, rec_user;
  int rec_top_n = 10;
  std::uint64_t rec_seed = 0;
  AlgoFlags rec_flags;
  rec->add_option("--matrix", rec_matrix_path, "Rating-matrix CSV")->required();
  rec->add_option("--user", rec_user)->required();
  rec->add_option("--top-n", rec_top_n)->capture_default_str();
  auto* rec_seed_opt = rec->add_option("--seed", rec_seed, "RNG seed (required for sgd/svdpp)");
  rec_flags.attach(rec);
  rec->callback([&] {
    auto cfg = rec_flags.to_config(rec->count("--threshold") > 0);
    if ((cfg.algorithm == Algorithm::Sgd || cfg.algorithm == Algorithm::Svdpp)) {
      if (rec_seed_opt->count() == 0)
        throw std::invalid_argument("--seed is required for sgd/svdpp");
      cfg.train.rng_seed = rec_seed;
    }
    Recommender recommender(load_matrix(rec_matrix_path), cfg);
    write_recommendation_csv(std::cout, recommender.recommend(rec_user, rec_top_n));
  });

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Evaluate one configuration");
  std::string eval_matrix_path, eval_protocol = "split", eval_out;
  double eval_ratio = 0.7;
  int eval_top_k = 10;
  std::uint64_t eval_seed = 0;
  AlgoFlags eval_flags;
  eval->add_option("--matrix", eval_matrix_path, "Rating-matrix CSV")->required();
  eval->add_option("--protocol", eval_protocol, "split or holdout")->capture_default_str();
  eval->add_option("--train-ratio", eval_ratio)->capture_default_str();
  eval->add_option("--top-k", eval_top_k)->capture_default_str();
  auto* eval_seed_opt = eval->add_option("--seed", eval_seed, "Split RNG seed");
  eval->add_option("--out", eval_out, "Report CSV path (default: stdout)");
  eval_flags.attach(eval);
  eval->callback([&] {
    ensure_distinct(eval_matrix_path, eval_out);
    auto cfg = eval_flags.to_config(eval->count("--threshold") > 0);
    auto matrix = load_matrix(eval_matrix_path);
    EvalReport report;
    if (eval_protocol == "split") {
      if (eval_seed_opt->count() == 0)
        throw std::invalid_argument("--seed is required for the split protocol");
      CellSpec spec;
      spec.algo = cfg;
      spec.train_ratio = eval_ratio;
      spec.top_k = eval_top_k;
      spec.seed = eval_seed;
      report = evaluate_cell(matrix, spec);
    } else if (eval_protocol == "holdout") {
      report = holdout_report(matrix, cfg, eval_top_k);
    } else {
      throw std::invalid_argument("unknown protocol '" + eval_protocol + "'");
    }
    if (eval_out.empty()) {
      write_report_csv(std::cout, {report});
    } else {
      auto out = open_output(eval_out);
      write_report_csv(out, {report});
    }
  });

  // sweep
  auto* sw = app.add_subcommand("sweep", "Evaluate a grid of configurations");
  std::string sweep_matrix_path, sweep_out;
  std::vector<std::string> sweep_algorithms{"user_cf"};
  std::vector<std::string> sweep_similarities{"euclidean"};
  std::vector<int> sweep_ks;
  std::vector<double> sweep_thresholds;
  std::vector<double> sweep_ratios{0.7};
  SweepGrid grid;
  std::uint64_t sweep_seed = 0;
  int sweep_significance = 50;
  bool sweep_no_significance = false;
  sw->add_option("--matrix", sweep_matrix_path, "Rating-matrix CSV")->required();
  sw->add_option("--algorithms", sweep_algorithms, "Comma-separated algorithm list")
      ->delimiter(',')
      ->capture_default_str();
  sw->add_option("--similarities", sweep_similarities, "Comma-separated similarity list")
      ->delimiter(',')
      ->capture_default_str();
  sw->add_option("--ks", sweep_ks, "Comma-separated neighborhood sizes")->delimiter(',');
  sw->add_option("--sim-thresholds", sweep_thresholds, "Comma-separated similarity thresholds")
      ->delimiter(',');
  sw->add_option("--train-ratios", sweep_ratios, "Comma-separated training ratios")
      ->delimiter(',')
      ->capture_default_str();
  sw->add_option("--significance", sweep_significance)->capture_default_str();
  sw->add_flag("--no-significance", sweep_no_significance);
  sw->add_option("--min-overlap", grid.min_overlap)->capture_default_str();
  sw->add_flag("--infer-missing", grid.infer_missing);
  sw->add_option("--top-k", grid.top_k)->capture_default_str();
  sw->add_option("--factors", grid.train.factors)->capture_default_str();
  sw->add_option("--learning-rate", grid.train.learning_rate)->capture_default_str();
  sw->add_option("--regularization", grid.train.regularization)->capture_default_str();
  sw->add_option("--epochs", grid.train.epochs)->capture_default_str();
  sw->add_option("--seed", sweep_seed, "RNG seed")->required();
  sw->add_option("--out", sweep_out, "Report CSV to write")->required();
  sw->callback([&] {
    ensure_distinct(sweep_matrix_path, sweep_out);
    for (const auto& name : sweep_algorithms) grid.algorithms.push_back(algorithm_from_flag(name));
    for (const auto& name : sweep_similarities)
      grid.similarities.push_back(similarity_from_flag(name));
    grid.neighborhood_sizes = sweep_ks;
    grid.similarity_thresholds = sweep_thresholds;
    grid.train_ratios = sweep_ratios;
    grid.significance_threshold =
        sweep_no_significance ? std::nullopt : std::optional<int>(sweep_significance);
    auto matrix = load_matrix(sweep_matrix_path);
    auto reports = sweep(matrix, grid, sweep_seed);
    auto out = open_output(sweep_out);
    write_report_csv(out, reports);
    std::cout << "cells=" << reports.size() << "\n";
  });

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const venuerec::CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
