// Copyright 2026 The VPF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Exit codes: 0 success, 2 input error,
// 3 contract violation.

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "vpf/vpf.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitContract = 3;

/// Accepts learner names and model file names alike.
std::vector<std::string> learner_names(std::vector<std::string> items) {
  for (auto& item : items) {
    item = std::filesystem::path(item).filename().string();
    if (item.rfind("model.", 0) == 0) item = item.substr(6);
    if (item.size() > 4 && item.compare(item.size() - 4, 4, ".vpf") == 0) item.resize(item.size() - 4);
  }
  return items;
}

std::map<std::string, double> parse_overrides(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    const std::string value = eq == std::string::npos ? "" : item.substr(eq + 1);
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || *end != '\0')
      throw vpf::InputError("InvalidArgument", "--set expects key=number, got '" + item + "'");
    out[item.substr(0, eq)] = v;
  }
  return out;
}

void print(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vpf: parliamentary vote prediction pipeline"};
  app.require_subcommand(1);
  std::string log_level;
  app.add_option("--log-level", log_level, "error, warn, info or debug")->envname("VPF_LOG");

  vpf::IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest", "parse and repair a country's raw datasets");
  c_ingest->add_option("country_dir", ingest.country_dir, "directory with config.json and the raw files")
      ->required()
      ->check(CLI::ExistingDirectory);
  c_ingest->add_option("--out", ingest.out_dir, "run directory")->required();
  c_ingest->add_option("--config", ingest.config_path, "country config (default: <country_dir>/config.json)");
  c_ingest->add_option("--overrides", ingest.overrides_path, "manual repair overrides CSV");

  vpf::EnrichOptions enrich;
  auto* c_enrich = app.add_subcommand("enrich", "join datasets and build the feature matrix");
  c_enrich->add_option("dir", enrich.in_dir, "run directory written by ingest")->required();
  c_enrich->add_option("--config", enrich.config_path, "country config")->required();
  c_enrich->add_option("--embeddings", enrich.embeddings_path, "precomputed bill embeddings CSV");
  c_enrich->add_option("--out", enrich.out_dir, "output directory (default: the input directory)");

  std::string split_dir;
  double target = 0.75;
  auto* c_split = app.add_subcommand("split", "chronological train/test split");
  c_split->add_option("dir", split_dir, "run directory")->required();
  c_split->add_option("--target", target, "training fraction")->check(CLI::Range(0.0, 1.0));

  vpf::TrainOptions train;
  std::vector<std::string> train_learners;
  std::vector<std::string> train_sets;
  auto* c_train = app.add_subcommand("train", "fit learners on the training rows");
  c_train->add_option("dir", train.dir, "run directory")->required();
  c_train
      ->add_option("--learner", train_learners,
                   "decision_tree, random_forest, gradient_boosted_trees, gaussian_naive_bayes or all")
      ->delimiter(',');
  c_train->add_option("--seed", train.seed, "master seed");
  c_train->add_option("--set", train_sets, "hyperparameter override key=value");

  std::string eval_dir;
  std::vector<std::string> eval_learners;
  auto* c_eval = app.add_subcommand("evaluate", "score trained models on the test rows");
  c_eval->add_option("dir", eval_dir, "run directory")->required();
  c_eval->add_option("--models,--learner", eval_learners, "learner names or model files (default: every trained model)")
      ->delimiter(',');

  vpf::ExplainOptions explain;
  auto* c_explain = app.add_subcommand("explain", "SHAP attributions and misprediction analysis");
  c_explain->add_option("dir", explain.dir, "run directory")->required();
  c_explain->add_option("--model", explain.model_file, "model file (default: the champion)");
  c_explain->add_option("--samples", explain.samples, "permutations per feature");
  c_explain->add_option("--background", explain.background, "background rows");
  c_explain->add_option("--rows", explain.max_rows, "test rows to explain");
  c_explain->add_option("--seed", explain.seed, "master seed");

  std::string report_dir;
  auto* c_report = app.add_subcommand("report", "summarize a finished run");
  c_report->add_option("dir", report_dir, "run directory")->required();

  vpf::SyntheticOptions gen;
  std::string gen_dir;
  auto* c_gen = app.add_subcommand("generate", "write a synthetic country in canonical CSV form");
  c_gen->add_option("out_dir", gen_dir, "destination directory")->required();
  c_gen->add_option("--seed", gen.seed, "generator seed");
  c_gen->add_option("--members", gen.n_members, "members per parliament");
  c_gen->add_option("--bills", gen.n_bills, "bills");
  c_gen->add_option("--defection-rate", gen.defection_rate, "per-vote defection probability")
      ->check(CLI::Range(0.0, 1.0));
  c_gen->add_option("--planted", gen.n_planted, "planted defections");
  c_gen->add_option("--embedding-dim", gen.embedding_dim, "hashed embedding width");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  if (!log_level.empty()) setenv("VPF_LOG", log_level.c_str(), 1);

  try {
    if (*c_ingest) {
      print(vpf::run_ingest(ingest));
    } else if (*c_enrich) {
      print(vpf::run_enrich(enrich));
    } else if (*c_split) {
      print(vpf::run_split(split_dir, target));
    } else if (*c_train) {
      train.learners = vpf::parse_learners(train_learners);
      train.overrides = parse_overrides(train_sets);
      print(vpf::run_train(train));
    } else if (*c_eval) {
      print(vpf::run_evaluate(eval_dir, eval_learners.empty() ? std::vector<vpf::LearnerKind>{}
                                                              : vpf::parse_learners(learner_names(eval_learners))));
    } else if (*c_explain) {
      print(vpf::run_explain(explain));
    } else if (*c_report) {
      vpf::run_report(report_dir);
      std::cout << vpf::read_file((std::filesystem::path(report_dir) / vpf::artifact::kReportText).string());
    } else if (*c_gen) {
      const auto sp = vpf::generate_parliament(gen);
      vpf::write_synthetic_country(gen_dir, sp);
      print({{"dir", gen_dir}, {"votes", sp.bundle.votes.size()}, {"planted", sp.planted.size()}});
    }
  } catch (const vpf::ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitContract;
  } catch (const vpf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error [FileUnreadable]: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return 0;
}
