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

#pragma once

// Stage runners behind the command line. Each stage reads the artifacts of
// the previous one from a run directory, writes its own, and records input
// and output hashes in manifest.json. Wall-clock timings go to a separate
// manifest_timings.json so the manifest itself stays reproducible.

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "vpf/common.hpp"
#include "vpf/config.hpp"
#include "vpf/eval.hpp"
#include "vpf/explain.hpp"
#include "vpf/features.hpp"
#include "vpf/ingest.hpp"
#include "vpf/models.hpp"
#include "vpf/schema.hpp"
#include "vpf/split.hpp"

namespace vpf {

namespace fs = std::filesystem;

namespace artifact {
inline constexpr const char* kMembers = "members.csv";
inline constexpr const char* kBills = "bills.csv";
inline constexpr const char* kVotes = "votes.csv";
inline constexpr const char* kProtocols = "protocols.csv";
inline constexpr const char* kRepairLog = "repair_log.csv";
inline constexpr const char* kRejects = "rejects.csv";
inline constexpr const char* kValidation = "validation.json";
inline constexpr const char* kEnriched = "enriched.csv";
inline constexpr const char* kMatrix = "feature_matrix.bin";
inline constexpr const char* kColumnSpec = "column_spec.json";
inline constexpr const char* kDictionaries = "dictionaries.json";
inline constexpr const char* kCoverage = "coverage.json";
inline constexpr const char* kSplitPlan = "split_plan.json";
inline constexpr const char* kTrainRows = "train_rows.csv";
inline constexpr const char* kTestRows = "test_rows.csv";
inline constexpr const char* kMetrics = "metrics.json";
inline constexpr const char* kRocPoints = "roc_points.csv";
inline constexpr const char* kPredictions = "predictions.csv";
inline constexpr const char* kBillReport = "bill_report.csv";
inline constexpr const char* kPassReject = "pass_reject.json";
inline constexpr const char* kChampion = "champion.json";
inline constexpr const char* kShapValues = "shap_values.csv";
inline constexpr const char* kImportance = "feature_importance.csv";
inline constexpr const char* kAnomalies = "anomalies.csv";
inline constexpr const char* kAnomalyGroups = "anomaly_groups.json";
inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kReportText = "report.txt";
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kTimings = "manifest_timings.json";
}  // namespace artifact

inline std::string content_hash(std::string_view bytes) { return hex64(fnv1a64(bytes)); }

/// Reads `dir/name`, failing with MissingArtifact when an earlier stage has
/// not produced it.
inline std::string read_artifact(const fs::path& dir, const std::string& name, std::string_view stage) {
  const fs::path p = dir / name;
  if (!fs::is_regular_file(p))
    throw MissingArtifact(p.string() + " not found; run '" + std::string(stage) + "' first");
  return read_file(p.string());
}

inline nlohmann::json read_json_artifact(const fs::path& dir, const std::string& name, std::string_view stage) {
  const std::string text = read_artifact(dir, name, stage);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(name + ": " + e.what());
  }
}

inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

/// Collects what one stage read and wrote, then merges it into the run
/// directory's manifest.
class StageRecorder {
 public:
  StageRecorder(fs::path dir, std::string stage)
      : dir_(std::move(dir)), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}

  void input(const std::string& label, std::string_view bytes) { inputs_[label] = content_hash(bytes); }
  void param(const std::string& key, nlohmann::json v) { params_[key] = std::move(v); }

  void write(const std::string& name, std::string_view bytes) {
    fs::create_directories(dir_);
    write_file((dir_ / name).string(), bytes);
    outputs_[name] = content_hash(bytes);
  }

  const fs::path& dir() const { return dir_; }

  void finish() {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    nlohmann::json manifest = load(artifact::kManifest);
    nlohmann::json& st = manifest["stages"][stage_];
    st = {{"inputs", inputs_}, {"outputs", outputs_}, {"params", params_}};
    std::string fingerprint;
    for (const auto& [name, s] : manifest["stages"].items()) fingerprint += name + s["inputs"].dump() + s["params"].dump();
    manifest["run_id"] = content_hash(fingerprint);
    manifest["format"] = "vpf-manifest";
    manifest["version"] = 1;
    write_file((dir_ / artifact::kManifest).string(), dump_json(manifest));

    nlohmann::json timings = load(artifact::kTimings);
    timings[stage_] = seconds;
    write_file((dir_ / artifact::kTimings).string(), dump_json(timings));
    log(LogLevel::kInfo, stage_ + " finished in " + format_double(seconds) + " s");
  }

 private:
  nlohmann::json load(const char* name) const {
    const fs::path p = dir_ / name;
    if (!fs::is_regular_file(p)) return nlohmann::json::object();
    try {
      auto j = nlohmann::json::parse(read_file(p.string()));
      if (j.is_object()) return j;
    } catch (const nlohmann::json::exception&) {
    }
    log(LogLevel::kWarn, p.string() + " is unreadable; starting a new one");
    return nlohmann::json::object();
  }

  fs::path dir_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
  nlohmann::json inputs_ = nlohmann::json::object();
  nlohmann::json outputs_ = nlohmann::json::object();
  nlohmann::json params_ = nlohmann::json::object();
};

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const DatasetIssues& d) {
  return {{"duplicates", d.duplicates},
          {"missing_dates", d.missing_dates},
          {"dates_out_of_range", d.dates_out_of_range},
          {"dangling_refs", d.dangling_refs},
          {"missing_fields", d.missing_fields}};
}

inline nlohmann::json to_json(const ValidationReport& r) {
  return {{"members", to_json(r.members)},
          {"bills", to_json(r.bills)},
          {"votes", to_json(r.votes)},
          {"protocols", to_json(r.protocols)},
          {"tally_mismatch", r.tally_mismatch},
          {"attendee_count_mismatch", r.attendee_count_mismatch},
          {"total", r.total()}};
}

struct IngestOptions {
  std::string country_dir;
  std::string config_path;     // default: <country_dir>/config.json
  std::string overrides_path;  // default: <country_dir>/overrides.csv when present
  std::string out_dir;
};

inline nlohmann::json run_ingest(const IngestOptions& opt) {
  StageRecorder rec(opt.out_dir, "ingest");
  const std::string config_path =
      opt.config_path.empty() ? (fs::path(opt.country_dir) / "config.json").string() : opt.config_path;
  if (!fs::is_regular_file(config_path)) throw FileUnreadable("config not found: " + config_path);
  rec.input("config", read_file(config_path));
  const CountryConfig config = load_config(config_path);

  for (const auto& [kind, src] : config.sources) {
    const fs::path p = fs::path(opt.country_dir) / src.file;
    if (fs::is_regular_file(p)) rec.input(std::string(name(kind)), read_file(p.string()));
  }
  RawBundle bundle = ingest_country(opt.country_dir, config);

  std::string overrides_path = opt.overrides_path;
  if (overrides_path.empty() && fs::is_regular_file(fs::path(opt.country_dir) / "overrides.csv"))
    overrides_path = (fs::path(opt.country_dir) / "overrides.csv").string();
  std::vector<OverrideEntry> overrides;
  if (!overrides_path.empty()) {
    const std::string text = read_file(overrides_path);
    rec.input("overrides", text);
    overrides = parse_overrides(text);
  }
  bundle = repair_missing(std::move(bundle), overrides);
  if (bundle.votes.empty()) throw EmptyInput("no vote rows survived ingestion");

  const ValidationReport validation = validate_bundle(bundle, config.year_range);
  nlohmann::json vj = to_json(validation);
  vj["unresolved_missing"] = bundle.unresolved_missing;
  vj["rejects"] = bundle.rejects.size();
  vj["repairs"] = bundle.repair_log.size();
  vj["rows"] = {{"members", bundle.members.size()},
                {"bills", bundle.bills.size()},
                {"votes", bundle.votes.size()},
                {"protocols", bundle.protocols.size()}};
  vj["country"] = config.country;

  rec.write(artifact::kMembers, format_canonical(bundle.members, DatasetKind::kMembers));
  rec.write(artifact::kBills, format_canonical(bundle.bills, DatasetKind::kBills));
  rec.write(artifact::kVotes, format_canonical(bundle.votes, DatasetKind::kVotes));
  rec.write(artifact::kProtocols, format_canonical(bundle.protocols, DatasetKind::kProtocols));
  rec.write(artifact::kRepairLog, format_repair_log(bundle.repair_log));
  rec.write(artifact::kRejects, format_rejects(bundle.rejects));
  rec.write(artifact::kValidation, dump_json(vj));
  rec.finish();
  return vj;
}

// ---------------------------------------------------------------------------
// enrich
// ---------------------------------------------------------------------------

/// Canonical tables written by ingest.
inline RawBundle load_canonical_bundle(const fs::path& dir, StageRecorder* rec = nullptr) {
  const auto load = [&](const char* name) {
    std::string text = read_artifact(dir, name, "ingest");
    if (rec) rec->input(name, text);
    return text;
  };
  RawBundle b;
  b.members = read_canonical_members(load(artifact::kMembers));
  b.bills = read_canonical_bills(load(artifact::kBills));
  b.votes = read_canonical_votes(load(artifact::kVotes));
  b.protocols = read_canonical_protocols(load(artifact::kProtocols));
  return b;
}

struct EnrichOptions {
  std::string in_dir;
  std::string config_path;
  std::string embeddings_path;  // overrides the config's embedding source
  std::string out_dir;
};

inline nlohmann::json run_enrich(const EnrichOptions& opt) {
  StageRecorder rec(opt.out_dir.empty() ? opt.in_dir : opt.out_dir, "enrich");
  if (!fs::is_regular_file(opt.config_path)) throw FileUnreadable("config not found: " + opt.config_path);
  rec.input("config", read_file(opt.config_path));
  const CountryConfig config = load_config(opt.config_path);
  const RawBundle bundle = load_canonical_bundle(opt.in_dir, &rec);
  if (!opt.embeddings_path.empty()) rec.input("embeddings", read_file(opt.embeddings_path));
  const auto embedder = make_embedder(config, opt.embeddings_path);

  const EnrichedDataset enriched = build_enriched(bundle, config, *embedder);
  EncodingOptions eo;
  eo.policy = config.encoding;
  eo.embedding_dim = embedder->dim();
  eo.classes = config.class_codes();
  const FeatureMatrix m = encode_features(enriched.records, eo);
  if (m.n == 0) throw EmptyInput("no dated vote rows to encode");

  const auto& cov = enriched.coverage;
  const nlohmann::json cj = {{"n_votes", cov.n_votes},
                             {"member_join", cov.member_join()},
                             {"bill_join", cov.bill_join()},
                             {"protocol_join", cov.protocol_join()},
                             {"affiliation_defaulted", cov.affiliation_defaulted},
                             {"affiliation_missing", cov.affiliation_missing},
                             {"encoded_rows", m.n},
                             {"features", m.p},
                             {"embedding_dim", m.embedding_dim}};
  rec.param("embedding_dim", m.embedding_dim);
  rec.write(artifact::kEnriched, format_enriched(enriched.records));
  rec.write(artifact::kMatrix, serialize_matrix(m));
  rec.write(artifact::kColumnSpec, dump_json(column_spec_json(m)));
  rec.write(artifact::kDictionaries, dump_json(m.dictionaries.to_json()));
  rec.write(artifact::kCoverage, dump_json(cj));
  rec.finish();
  return cj;
}

inline FeatureMatrix load_matrix(const fs::path& dir, StageRecorder* rec = nullptr) {
  const std::string bin = read_artifact(dir, artifact::kMatrix, "enrich");
  const std::string spec = read_artifact(dir, artifact::kColumnSpec, "enrich");
  const std::string dict = read_artifact(dir, artifact::kDictionaries, "enrich");
  if (rec) {
    rec->input(artifact::kMatrix, bin);
    rec->input(artifact::kColumnSpec, spec);
    rec->input(artifact::kDictionaries, dict);
  }
  try {
    return deserialize_matrix(bin, nlohmann::json::parse(spec), nlohmann::json::parse(dict));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("column spec or dictionaries: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

inline nlohmann::json run_split(const std::string& dir, double target = 0.75) {
  StageRecorder rec(dir, "split");
  const FeatureMatrix m = load_matrix(dir, &rec);
  rec.param("target", target);
  const SplitResult s = time_series_split(m, target);
  rec.write(artifact::kSplitPlan, dump_json(s.plan.to_json()));
  rec.write(artifact::kTrainRows, format_row_keys(m, s.train_index));
  rec.write(artifact::kTestRows, format_row_keys(m, s.test_index));
  rec.finish();
  return s.plan.to_json();
}

inline SplitResult load_split(const fs::path& dir, const FeatureMatrix& m, StageRecorder* rec = nullptr) {
  const std::string text = read_artifact(dir, artifact::kSplitPlan, "split");
  if (rec) rec->input(artifact::kSplitPlan, text);
  SplitPlan plan;
  try {
    plan = SplitPlan::from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("split_plan.json: ") + e.what());
  }
  SplitResult s = apply_split(m, plan);
  if (s.train.n != plan.train_rows || s.test.n != plan.test_rows)
    throw ContractViolation("split plan row counts do not match the feature matrix");
  return s;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

inline std::vector<LearnerKind> parse_learners(const std::vector<std::string>& names) {
  std::vector<LearnerKind> out;
  for (const auto& n : names) {
    if (n == "all") {
      for (const auto k : kAllLearners)
        if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
      continue;
    }
    const auto k = learner_from_name(n);
    if (!k) throw InputError("InvalidArgument", "unknown learner '" + n + "'");
    if (std::find(out.begin(), out.end(), *k) == out.end()) out.push_back(*k);
  }
  if (out.empty()) out.assign(kAllLearners.begin(), kAllLearners.end());
  return out;
}

struct TrainOptions {
  std::string dir;
  std::vector<LearnerKind> learners{kAllLearners.begin(), kAllLearners.end()};
  std::uint64_t seed = 0;
  std::map<std::string, double> overrides;  // applied to every learner that knows the key
};

inline nlohmann::json run_train(const TrainOptions& opt) {
  StageRecorder rec(opt.dir, "train");
  const FeatureMatrix m = load_matrix(opt.dir, &rec);
  const SplitResult s = load_split(opt.dir, m, &rec);
  if (s.train.n == 0) throw EmptyTrainingSet("the split left no training rows");
  rec.param("seed", opt.seed);
  nlohmann::json out = nlohmann::json::object();
  for (const auto kind : opt.learners) {
    std::map<std::string, double> hp;
    const auto defaults = default_hyperparameters(kind);
    for (const auto& [key, v] : opt.overrides)
      if (defaults.count(key)) hp[key] = v;
    const std::string learner(name(kind));
    const LearnerSpec spec = LearnerSpec::make(kind, derive_seed(opt.seed, "train." + learner), hp);
    TrainedModel model = train(spec, s.train);
    model.train_boundary = s.plan.boundary_date;
    rec.write(model_file_name(kind), model_to_json(model).dump() + "\n");
    out[learner] = {{"file", model_file_name(kind)}, {"trees", model.trees.size()}, {"best_round", model.best_round}};
  }
  rec.param("learners", out);
  rec.finish();
  return out;
}

inline TrainedModel load_model(const fs::path& path, StageRecorder* rec = nullptr) {
  if (!fs::is_regular_file(path)) throw MissingArtifact(path.string() + " not found; run 'train' first");
  const std::string text = read_file(path.string());
  if (rec) rec->input(path.filename().string(), text);
  try {
    return model_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

inline std::vector<VotePrediction> vote_predictions(const FeatureMatrix& test, const std::vector<int>& labels) {
  std::vector<VotePrediction> out;
  out.reserve(test.n);
  for (std::size_t i = 0; i < test.n; ++i) out.push_back({test.row_keys[i], labels[i]});
  return out;
}

inline std::string format_predictions(const FeatureMatrix& test, const std::vector<int>& labels,
                                      const std::vector<double>& proba, const std::vector<int>& classes) {
  std::vector<std::string> header = {"vote_id", "member_id", "vote_date", "actual", "predicted"};
  for (const int c : classes) header.push_back("p_" + std::to_string(c));
  std::string out;
  csv::append_row(out, header);
  const std::size_t k = classes.size();
  for (std::size_t i = 0; i < test.n; ++i) {
    std::vector<std::string> row = {test.row_keys[i].vote_id, test.row_keys[i].member_id, test.row_dates[i].iso(),
                                    std::to_string(test.y[i]), std::to_string(labels[i])};
    for (std::size_t c = 0; c < k; ++c) row.push_back(format_double(proba[i * k + c]));
    csv::append_row(out, row);
  }
  return out;
}

inline std::vector<LearnerKind> present_models(const fs::path& dir) {
  std::vector<LearnerKind> out;
  for (const auto k : kAllLearners)
    if (fs::is_regular_file(dir / model_file_name(k))) out.push_back(k);
  return out;
}

inline nlohmann::json run_evaluate(const std::string& dir, std::vector<LearnerKind> learners = {}) {
  StageRecorder rec(dir, "evaluate");
  if (learners.empty()) learners = present_models(dir);
  if (learners.empty()) throw MissingArtifact("no model files in " + dir + "; run 'train' first");
  const FeatureMatrix m = load_matrix(dir, &rec);
  const SplitResult s = load_split(dir, m, &rec);
  if (s.test.n == 0) throw EmptyInput("the split left no test rows");
  const std::string enriched_text = read_artifact(dir, artifact::kEnriched, "enrich");
  rec.input(artifact::kEnriched, enriched_text);
  const std::vector<EnrichedRecord> records = read_enriched(enriched_text);

  std::vector<std::pair<LearnerSpec, EvaluationReport>> results;
  std::vector<std::vector<int>> labels;
  std::vector<std::vector<double>> probas;
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto kind : learners) {
    const TrainedModel model = load_model(fs::path(dir) / model_file_name(kind), &rec);
    auto proba = predict_proba(model, s.test);
    auto pred = argmax_labels(proba, model.classes);
    EvaluationReport r = compute_metrics(s.test.y, pred, proba, model.classes);
    metrics[std::string(name(kind))] = r.to_json();
    rec.write("roc_points." + std::string(name(kind)) + ".csv", draw_roc_points(r));
    results.emplace_back(model.spec, std::move(r));
    labels.push_back(std::move(pred));
    probas.push_back(std::move(proba));
  }

  std::vector<const EvaluationReport*> reports;
  for (const auto& r : results) reports.push_back(&r.second);
  const std::size_t best = best_report_index(reports);
  const std::string champion(name(learners[best]));
  const BillReport bills = bill_level_accuracy(vote_predictions(s.test, labels[best]), records);

  const nlohmann::json cj = {{"learner", champion},
                             {"model_file", model_file_name(learners[best])},
                             {"accuracy", results[best].second.accuracy},
                             {"auc_micro", metrics[champion]["auc_micro"]},
                             {"bill_accuracy", bills.accuracy}};
  rec.write(artifact::kMetrics, dump_json({{"models", metrics}, {"champion", champion}, {"test_rows", s.test.n}}));
  rec.write(artifact::kRocPoints, draw_roc_points(results[best].second));
  rec.write(artifact::kPredictions, format_predictions(s.test, labels[best], probas[best], m.classes));
  rec.write(artifact::kBillReport, format_bill_report(bills));
  rec.write(artifact::kPassReject, dump_json(bills.summary_json()));
  rec.write(artifact::kChampion, dump_json(cj));
  rec.finish();
  return cj;
}

// ---------------------------------------------------------------------------
// explain
// ---------------------------------------------------------------------------

struct ExplainOptions {
  std::string dir;
  std::string model_file;  // default: the champion
  std::size_t samples = 200;
  std::size_t background = 100;
  std::size_t max_rows = 200;  // explained test rows, evenly spaced
  std::uint64_t seed = 0;
};

inline nlohmann::json run_explain(const ExplainOptions& opt) {
  StageRecorder rec(opt.dir, "explain");
  if (opt.samples == 0) throw InputError("InvalidArgument", "--samples must be positive");
  fs::path model_path = opt.model_file;
  if (model_path.empty()) {
    const auto champion = read_json_artifact(opt.dir, artifact::kChampion, "evaluate");
    model_path = fs::path(opt.dir) / champion.at("model_file").get<std::string>();
  } else if (model_path.is_relative() && !fs::exists(model_path)) {
    model_path = fs::path(opt.dir) / model_path;
  }
  const TrainedModel model = load_model(model_path, &rec);
  const FeatureMatrix m = load_matrix(opt.dir, &rec);
  const SplitResult s = load_split(opt.dir, m, &rec);
  const std::string enriched_text = read_artifact(opt.dir, artifact::kEnriched, "enrich");
  rec.input(artifact::kEnriched, enriched_text);
  const std::vector<EnrichedRecord> records = read_enriched(enriched_text);
  rec.param("samples", opt.samples);
  rec.param("background", opt.background);
  rec.param("max_rows", opt.max_rows);
  rec.param("seed", opt.seed);

  const Background bg = sample_background(s.train, opt.background);
  const auto proba = predict_proba(model, s.test);
  const auto labels = argmax_labels(proba, model.classes);

  std::vector<std::size_t> order(s.test.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (s.test.row_dates[a] != s.test.row_dates[b]) return s.test.row_dates[a] < s.test.row_dates[b];
    return s.test.row_keys[a] < s.test.row_keys[b];
  });
  const std::size_t count = std::min(opt.max_rows, s.test.n);
  std::vector<Attribution> attributions;
  std::vector<std::vector<double>> values;
  const std::uint64_t base_seed = derive_seed(opt.seed, "explain");
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t r = order[i * s.test.n / count];
    const auto it = std::find(model.classes.begin(), model.classes.end(), labels[r]);
    const auto c = static_cast<std::size_t>(it - model.classes.begin());
    const std::string key = s.test.row_keys[r].str();
    Attribution a = shapley_sampling(class_probability(model, c), s.test.row(r), bg, opt.samples,
                                     splitmix64(base_seed ^ fnv1a64(key)));
    a.row_key = key;
    a.class_code = labels[r];
    attributions.push_back(std::move(a));
    const auto row = s.test.row(r);
    values.emplace_back(row.begin(), row.end());
  }
  const auto names = m.column_names();
  const auto ranking = feature_importance(attributions, names);
  const AnomalyReport anomalies = false_negative_report(vote_predictions(s.test, labels), records);

  rec.write(artifact::kShapValues, beeswarm_export(attributions, values, names, bg));
  rec.write(artifact::kImportance, format_feature_importance(ranking));
  rec.write(artifact::kAnomalies, format_anomalies(anomalies));
  rec.write(artifact::kAnomalyGroups, dump_json(anomaly_groups_json(anomalies)));
  rec.finish();

  nlohmann::json top = nlohmann::json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(10, ranking.size()); ++i)
    top.push_back({{"feature", ranking[i].feature}, {"mean_abs_phi", ranking[i].mean_abs_phi}});
  return {{"model_file", model_path.filename().string()},
          {"explained_rows", count},
          {"mispredictions", anomalies.rows.size()},
          {"defections", anomalies.defections()},
          {"top_features", top}};
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

inline std::string format_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f%%", 100.0 * v);
  return buf;
}

inline nlohmann::json run_report(const std::string& dir) {
  StageRecorder rec(dir, "report");
  const auto load = [&](const char* name, const char* stage) {
    const std::string text = read_artifact(dir, name, stage);
    rec.input(name, text);
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string(name) + ": " + e.what());
    }
  };
  const auto validation = load(artifact::kValidation, "ingest");
  const auto coverage = load(artifact::kCoverage, "enrich");
  const auto plan = load(artifact::kSplitPlan, "split");
  const auto metrics = load(artifact::kMetrics, "evaluate");
  const auto champion = load(artifact::kChampion, "evaluate");
  const auto bills = load(artifact::kPassReject, "evaluate");
  nlohmann::json groups;
  nlohmann::json importance = nlohmann::json::array();
  const bool explained = fs::is_regular_file(fs::path(dir) / artifact::kAnomalyGroups);
  if (explained) {
    groups = load(artifact::kAnomalyGroups, "explain");
    const std::string text = read_artifact(dir, artifact::kImportance, "explain");
    rec.input(artifact::kImportance, text);
    const auto table = csv::parse_table(text);
    for (std::size_t i = 0; i < std::min<std::size_t>(10, table.rows.size()); ++i)
      importance.push_back({{"feature", table.rows[i].at(1)}, {"mean_abs_phi", table.rows[i].at(2)}});
  }

  const nlohmann::json report = {{"country", validation.value("country", "")},
                                 {"rows", validation["rows"]},
                                 {"validation_issues", validation["total"]},
                                 {"coverage", coverage},
                                 {"split", plan},
                                 {"champion", champion},
                                 {"models", metrics["models"]},
                                 {"bill_level", bills},
                                 {"top_features", importance},
                                 {"anomaly_groups", groups}};

  std::string t;
  const auto line = [&](const std::string& s) { t += s + "\n"; };
  line("Voting prediction report: " + report["country"].get<std::string>());
  line("");
  line("Votes ingested:      " + std::to_string(validation["rows"]["votes"].get<long long>()));
  line("Validation issues:   " + std::to_string(validation["total"].get<long long>()));
  line("Member join rate:    " + format_percent(coverage["member_join"].get<double>()));
  line("Bill join rate:      " + format_percent(coverage["bill_join"].get<double>()));
  line("Split boundary:      " + plan["boundary_date"].get<std::string>() + " (" +
       plan["resolution"].get<std::string>() + ", train " + format_percent(plan["train_fraction"].get<double>()) + ")");
  line("");
  line("learner                  accuracy    f1_weighted  auc_micro");
  for (const auto& [learner, r] : metrics["models"].items()) {
    char buf[160];
    const std::string auc = r["auc_micro"].is_null() ? "n/a" : format_percent(r["auc_micro"].get<double>());
    std::snprintf(buf, sizeof buf, "%-24s %-11s %-12s %s", learner.c_str(),
                  format_percent(r["accuracy"].get<double>()).c_str(),
                  format_percent(r["f1_weighted"].get<double>()).c_str(), auc.c_str());
    line(buf);
  }
  line("");
  line("Champion:            " + champion["learner"].get<std::string>());
  line("Bill-level accuracy: " + format_percent(bills["accuracy"].get<double>()) + " (" +
       std::to_string(bills["successful_bills"].get<long long>()) + " of " +
       std::to_string(bills["total_bills"].get<long long>()) + " bills)");
  const auto& pr = bills["pass_reject"];
  line("  passed:   " + std::to_string(pr["successful_passed"].get<long long>()) + " right, " +
       std::to_string(pr["failed_passed"].get<long long>()) + " wrong");
  line("  rejected: " + std::to_string(pr["successful_rejected"].get<long long>()) + " right, " +
       std::to_string(pr["failed_rejected"].get<long long>()) + " wrong");
  if (explained) {
    line("");
    line("Top features by mean |SHAP|:");
    for (const auto& f : importance) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "  %-24s %.4f", f["feature"].get<std::string>().c_str(),
                    std::stod(f["mean_abs_phi"].get<std::string>()));
      line(buf);
    }
  }

  rec.write(artifact::kReportJson, dump_json(report));
  rec.write(artifact::kReportText, t);
  rec.finish();
  return report;
}

}  // namespace vpf
