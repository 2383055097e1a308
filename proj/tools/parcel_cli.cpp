// parcel: command-line front end for the lost-parcel toolkit.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "parcel/error.hpp"
#include "parcel/experiment.hpp"
#include "parcel/explain.hpp"
#include "parcel/parallel.hpp"
#include "parcel/serialize.hpp"

namespace fs = std::filesystem;
using namespace parcel;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
};

io::Json config_section(const Globals& g, const char* key) {
  if (g.config.empty()) return nullptr;
  const auto j = io::read_json(g.config);
  if (!j.is_object()) throw InvalidArgument("config file must hold a JSON object");
  if (key == nullptr) return j;
  if (j.contains(key)) return j.at(key);
  if (j.contains("pipeline") && j.at("pipeline").contains(key)) return j.at("pipeline").at(key);
  return nullptr;
}

std::uint64_t seed_or(const Globals& g, std::uint64_t fallback) { return g.seed.value_or(fallback); }

fs::path out_or(const Globals& g, const fs::path& fallback) { return g.out.empty() ? fallback : fs::path(g.out); }

Hyperparameters parse_params(const std::vector<std::string>& items) {
  Hyperparameters p;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidArgument(fmt::format("--param expects key=value, got '{}'", item));
    p[item.substr(0, eq)] = io::parse_double(item.substr(eq + 1));
  }
  return p;
}

void print_metrics(const ConfusionMatrix& cm, const MetricReport& r) {
  auto show = [](const std::optional<double>& v) { return v ? fmt::format("{:.3f}", *v) : std::string("undefined"); };
  fmt::print("tp {} fp {} fn {} tn {}\n", cm.tp, cm.fp, cm.fn, cm.tn);
  fmt::print("precision {}  recall {}  TNR {}  BA {}  ROC-AUC {}\n", show(r.precision), show(r.recall), show(r.tnr),
             show(r.balanced_accuracy), show(r.roc_auc));
  for (const auto& d : r.diagnostics) fmt::print("note: {}\n", d);
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  SyntheticConfig cfg;
};

void cmd_generate(const Globals& g, GenerateArgs a) {
  if (auto j = config_section(g, "data"); !j.is_null() && j.contains("synthetic"))
    a.cfg = io::synthetic_config_from_json(j.at("synthetic"));
  a.cfg.seed = seed_or(g, a.cfg.seed);
  const auto out = out_or(g, "synthetic.csv");
  const auto raw = generate_synthetic(a.cfg);
  io::write_raw_csv(out, raw);
  auto schema_path = out;
  schema_path += ".schema.json";
  io::write_json(schema_path, io::to_json(raw.schema));
  std::size_t pos = 0;
  for (int y : raw.labels) pos += static_cast<std::size_t>(y);
  fmt::print("wrote {} rows ({} lost) to {} and schema to {}\n", raw.size(), pos, out.string(), schema_path.string());
}

// --- preprocess -------------------------------------------------------------

struct PreprocessArgs {
  std::string data, schema;
  int max_categories = 20;
  std::vector<std::string> log_columns;
  bool no_log = false;
};

void cmd_preprocess(const Globals& g, PreprocessArgs a) {
  if (auto j = config_section(g, "preprocess"); !j.is_null()) {
    a.max_categories = j.value("max_categories", a.max_categories);
    if (a.log_columns.empty() && j.contains("log_columns")) a.log_columns = j.at("log_columns").get<std::vector<std::string>>();
  }
  fs::path schema = a.schema;
  if (schema.empty()) {
    schema = a.data;
    schema += ".schema.json";
  }
  const auto raw = io::read_raw_csv(a.data, io::schema_from_json(io::read_json(schema)));
  auto table = encode_one_hot(raw, a.max_categories);
  if (!a.no_log) {
    const auto cols = a.log_columns.empty() ? numeric_feature_names(raw.schema) : a.log_columns;
    if (!cols.empty()) table = log_transform(table, cols);
  }
  const auto out = out_or(g, "encoded.csv");
  io::save_table(out, table);
  fmt::print("encoded {} rows into {} columns: {}\n", table.rows(), table.cols(), out.string());
}

// --- split ------------------------------------------------------------------

struct SplitArgs {
  std::string data;
  SplitSpec spec;
};

void cmd_split(const Globals& g, SplitArgs a) {
  if (auto j = config_section(g, "split"); !j.is_null()) a.spec = io::split_spec_from_json(j);
  a.spec.seed = seed_or(g, a.spec.seed);
  const auto table = io::load_table(a.data);
  const auto split = stratified_split(table, a.spec);
  const auto dir = out_or(g, "split");
  fs::create_directories(dir);
  io::save_table(dir / "train.csv", split.train);
  io::save_table(dir / "validation.csv", split.validation);
  io::save_table(dir / "test.csv", split.test);
  fmt::print("train {} ({} lost), validation {} ({} lost), test {} ({} lost) in {}\n", split.train.rows(),
             split.train.positives(), split.validation.rows(), split.validation.positives(), split.test.rows(),
             split.test.positives(), dir.string());
}

// --- train-dbsl / tune --------------------------------------------------------

struct DbslArgs {
  std::vector<std::string> data;
  std::string resample = "ru";
  std::string classifier = "rf";
  std::string base;
  double ratio = 1.0;
  int k_neighbors = 3;
  std::vector<std::string> params;
  int candidates = 20;
  int folds = 5;
  int repeats = 3;
  std::string objective = "balanced_accuracy";
};

LabeledTable load_concat(const std::vector<std::string>& paths) {
  if (paths.empty()) throw InvalidArgument("--data is required");
  auto table = io::load_table(paths.front());
  for (std::size_t i = 1; i < paths.size(); ++i) {
    const auto next = io::load_table(paths[i]);
    if (next.columns() != table.columns()) throw DataError(fmt::format("'{}' has different columns", paths[i]));
    Matrix m(table.matrix().rows() + next.matrix().rows(), table.matrix().cols());
    m << table.matrix(), next.matrix();
    auto labels = table.labels();
    labels.insert(labels.end(), next.labels().begin(), next.labels().end());
    auto ids = table.row_ids();
    ids.insert(ids.end(), next.row_ids().begin(), next.row_ids().end());
    LabeledTable merged(table.columns(), std::move(m), std::move(labels), std::move(ids));
    merged.set_one_hot_groups(table.one_hot_groups());
    merged.set_log_columns(table.log_columns());
    table = std::move(merged);
  }
  return table;
}

DbslSpec dbsl_from_args(const Globals& g, const DbslArgs& a, bool from_config) {
  if (from_config)
    if (auto j = config_section(g, "dbsl"); !j.is_null()) {
      auto s = io::dbsl_spec_from_json(j);
      s.classifier.seed = seed_or(g, s.classifier.seed);
      if (s.resample) s.resample->seed = derive_seed(s.classifier.seed, "resample");
      return s;
    }
  DbslSpec s;
  s.classifier.kind = classifier_kind_from_string(a.classifier);
  if (!a.base.empty()) s.classifier.base_kind = classifier_kind_from_string(a.base);
  if (is_wrapper(s.classifier.kind) && !s.classifier.base_kind) s.classifier.base_kind = ClassifierKind::decision_tree;
  s.classifier.params = parse_params(a.params);
  s.classifier.seed = seed_or(g, 0);
  if (a.resample != "none" && !is_wrapper(s.classifier.kind)) {
    ResampleSpec r;
    r.method = resample_method_from_string(a.resample);
    r.target_ratio = a.ratio;
    r.k_neighbors = a.k_neighbors;
    r.seed = derive_seed(s.classifier.seed, "resample");
    s.resample = r;
  }
  s.classifier.validate();
  return s;
}

void cmd_train_dbsl(const Globals& g, const DbslArgs& a, bool config_given) {
  const auto table = load_concat(a.data);
  const auto spec = dbsl_from_args(g, a, config_given);
  const auto model = fit_dbsl(table, spec);
  const auto out = out_or(g, "model.json");
  io::save_model(out, {table.columns(), model});
  fmt::print("trained {} on {} rows; model written to {}\n", to_string(spec.classifier.kind), table.rows(),
             out.string());
}

void cmd_tune(const Globals& g, const DbslArgs& a, bool config_given) {
  const auto table = load_concat(a.data);
  const auto spec = dbsl_from_args(g, a, config_given);
  SearchSpec search;
  if (auto j = config_section(g, "search"); !j.is_null()) search = io::search_spec_from_json(j);
  else {
    search.n_candidates = a.candidates;
    search.folds = a.folds;
    search.repeats = a.repeats;
    search.objective = objective_from_string(a.objective);
  }
  search.seed = seed_or(g, search.seed);
  const auto tuned = tune_dbsl(table, spec, search);
  const auto dir = out_or(g, "tune");
  fs::create_directories(dir);
  io::write_text(dir / "search_trace.csv", search_trace_csv(tuned.search));
  io::write_json(dir / "best.json", {{"dbsl", io::to_json(tuned.spec)}, {"cv_score", tuned.search.best_score}});
  io::save_model(dir / "model.json", {table.columns(), fit_dbsl(table, tuned.spec)});
  fmt::print("best candidate {} with CV {} {:.4f}; outputs in {}\n", tuned.search.best_index,
             to_string(search.objective), tuned.search.best_score, dir.string());
}

// --- train-dhel ---------------------------------------------------------------

struct DhelArgs {
  std::string train, validation;
  std::string network = "ae";
  std::string classifier = "rf";
  std::vector<std::string> params;
  int epochs = 100;
  int candidates = 0;
  int folds = 5;
  int repeats = 3;
};

void cmd_train_dhel(const Globals& g, const DhelArgs& a, bool config_given) {
  DhelSpec spec = DhelSpec::defaults();
  if (auto j = config_section(g, "dhel"); config_given && !j.is_null()) {
    spec = io::dhel_spec_from_json(j);
  } else {
    spec.network = NetworkSpec::preset(autoencoder_variant_from_string(a.network));
    spec.training.epochs = a.epochs;
    const auto kind = classifier_kind_from_string(a.classifier);
    if (kind != spec.classifier.kind) spec.classifier = ClassifierSpec{kind, {}, std::nullopt, 0};
    else spec.classifier.params["subsample_features"] = static_cast<double>(spec.network.input_features);
    for (const auto& [k, v] : parse_params(a.params)) spec.classifier.params[k] = v;
    spec.search.n_candidates = a.candidates;
    spec.search.folds = a.folds;
    spec.search.repeats = a.repeats;
  }
  spec.seed = seed_or(g, spec.seed);
  const auto train = io::load_table(a.train);
  const auto validation = io::load_table(a.validation);
  const auto model = train_dhel(train, validation, spec);
  verify_provenance(model);
  const auto out = out_or(g, "model.json");
  io::save_model(out, {train.columns(), model});
  fmt::print("{} on {} normals, classifier on {} error vectors; model written to {}\n", to_string(spec.network.variant),
             model.provenance.autoencoder_rows.size(), model.provenance.classifier_rows.size(), out.string());
}

// --- evaluate -----------------------------------------------------------------

struct EvaluateArgs {
  std::string model, data;
  std::optional<double> threshold;
  std::string predictions;
  std::string name;
};

void cmd_evaluate(const Globals& g, const EvaluateArgs& a) {
  const auto file = io::load_model(a.model);
  const auto table = io::align_columns(io::load_table(a.data), file.columns);
  if (const auto* dhel = std::get_if<DhelModel>(&file.model)) verify_provenance(*dhel, &table);
  const auto scores = io::model_scores(file, table.matrix());
  std::vector<int> predicted;
  if (a.threshold && std::holds_alternative<AutoencoderModel>(file.model)) {
    for (double s : scores) predicted.push_back(s > *a.threshold ? 1 : 0);
  } else if (a.threshold) {
    predicted = threshold_labels(scores, *a.threshold);
  } else {
    predicted = io::model_predictions(file, table.matrix());
  }
  const auto cm = confusion(table.labels(), predicted);
  const auto report = metrics(cm, scores, table.labels());
  print_metrics(cm, report);
  const std::string name = a.name.empty() ? fs::path(a.model).stem().string() : a.name;
  if (!g.out.empty()) io::write_text(g.out, metrics_csv({{name, cm, report}}));
  if (!a.predictions.empty()) {
    io::CsvDocument doc;
    doc.header = {"row_id", "score", "prediction", "label"};
    for (std::size_t i = 0; i < scores.size(); ++i)
      doc.rows.push_back({std::to_string(table.row_ids()[i]), io::format_double(scores[i]),
                          std::to_string(predicted[i]), std::to_string(table.labels()[i])});
    io::write_csv(a.predictions, doc);
  }
}

// --- explain ------------------------------------------------------------------

struct ExplainArgs {
  std::string model, data;
  std::size_t top = 20;
  std::size_t rows = 50;
  std::size_t background = 200;
  std::size_t permutations = 200;
};

void cmd_explain(const Globals& g, const ExplainArgs& a) {
  const auto file = io::load_model(a.model);
  const auto table = io::align_columns(io::load_table(a.data), file.columns);
  const Scorer scorer = [&](const Matrix& rows) { return io::model_scores(file, rows); };
  const auto seed = seed_or(g, 0);
  const Matrix background = background_sample(table, a.background, derive_seed(seed, "background"));
  const auto n = std::min(a.rows, table.rows());
  std::vector<std::size_t> picked(n);
  for (std::size_t i = 0; i < n; ++i) picked[i] = i;
  const auto explained = table.subset(picked);
  const Matrix phi = attribution_matrix(scorer, background, explained.matrix(), a.permutations,
                                        derive_seed(seed, "explain"));
  const auto ranked = importance_summary(phi, table.columns());
  const auto dir = out_or(g, "explain");
  fs::create_directories(dir);

  io::CsvDocument attr;
  attr.header = table.columns();
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    std::vector<std::string> cells;
    for (Eigen::Index j = 0; j < phi.cols(); ++j) cells.push_back(io::format_double(phi(i, j)));
    attr.rows.push_back(std::move(cells));
  }
  io::write_csv(dir / "attributions.csv", attr);

  io::CsvDocument summary;
  summary.header = {"rank", "feature", "row", "value", "attribution"};
  std::string importance = "rank,feature,mean_abs_attribution\n";
  for (std::size_t r = 0; r < std::min(a.top, ranked.size()); ++r) {
    const auto j = static_cast<Eigen::Index>(ranked[r].feature);
    importance += fmt::format("{},{},{}\n", r + 1, ranked[r].name, io::format_double(ranked[r].mean_abs));
    fmt::print("{:>2}. {:<32} {:.5f}\n", r + 1, ranked[r].name, ranked[r].mean_abs);
    for (Eigen::Index i = 0; i < phi.rows(); ++i)
      summary.rows.push_back({std::to_string(r + 1), ranked[r].name, std::to_string(i),
                              io::format_double(explained.matrix()(i, j)), io::format_double(phi(i, j))});
  }
  io::write_text(dir / "importance.csv", importance);
  io::write_csv(dir / "summary_points.csv", summary);

  if (!ranked.empty()) {
    const auto& feature = ranked.front().name;
    const auto curve = partial_dependence(scorer, explained, feature, default_grid(explained, feature), &phi);
    std::string csv = "feature,grid,mean_score,interaction_feature\n";
    for (std::size_t k = 0; k < curve.grid.size(); ++k)
      csv += fmt::format("{},{},{},{}\n", feature, io::format_double(curve.grid[k]),
                         io::format_double(curve.mean_score[k]), curve.interaction_feature);
    io::write_text(dir / "dependence.csv", csv);
  }
  fmt::print("attributions for {} rows written to {}\n", n, dir.string());
}

// --- cost-report --------------------------------------------------------------

struct CostArgs {
  std::string data, rules;
  std::vector<std::string> predictions;
};

void cmd_cost_report(const Globals& g, const CostArgs& a) {
  InsuranceRuleTable rules = InsuranceRuleTable::example();
  if (!a.rules.empty()) rules = io::insurance_rules_from_json(io::read_json(a.rules));
  else if (auto j = config_section(g, "rules"); !j.is_null()) rules = io::insurance_rules_from_json(j);
  const auto table = io::load_table(a.data);
  const auto parcels = parcels_from_table(table);
  std::map<std::string, std::vector<int>> models;
  for (const auto& path : a.predictions) {
    const auto doc = io::read_csv(path);
    const auto col = doc.column("prediction");
    std::vector<int> pred;
    for (const auto& row : doc.rows) pred.push_back(row.at(col) == "1" ? 1 : 0);
    models[fs::path(path).stem().string()] = std::move(pred);
  }
  const auto reports = scenario_costs(parcels, rules, models);
  const auto csv = costs_csv(reports);
  if (g.out.empty()) std::fputs(csv.c_str(), stdout);
  else io::write_text(g.out, csv);
}

// --- compare / run --------------------------------------------------------------

void cmd_compare(const Globals& g, const std::vector<std::string>& runs) {
  std::vector<RunRecord> records;
  for (const auto& r : runs) {
    fs::path p = r;
    if (fs::is_directory(p)) p /= "run_record.json";
    records.push_back(run_record_from_json(io::read_json(p)));
  }
  const auto rows = compare_runs(records);
  std::fputs(comparison_text(rows).c_str(), stdout);
  if (!g.out.empty()) io::write_text(g.out, comparison_csv(rows));
}

void cmd_run(const Globals& g, const std::string& manifest_path) {
  const fs::path path = manifest_path.empty() ? fs::path(g.config) : fs::path(manifest_path);
  if (path.empty()) throw InvalidArgument("run needs --manifest or --config");
  auto m = load_manifest(path);
  if (g.seed) m.seed = *g.seed;
  if (!g.out.empty()) m.output_dir = g.out;
  const auto record = run_experiment(m);
  for (const auto& mm : record.metrics)
    fmt::print("{:<16} BA {:.3f}  ROC-AUC {:.3f}\n", mm.model, mm.report.balanced_accuracy.value_or(NAN),
               mm.report.roc_auc.value_or(NAN));
  fmt::print("artifacts in {}\n", m.output_dir.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lost-parcel prediction toolkit: resampling learners, autoencoder hybrids, costs and explanations"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON config; subcommands read their section (dbsl, dhel, search, rules, ...)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Global seed");
  app.add_option("--out", g.out, "Output file or directory");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic raw parcel CSV and its schema");
  generate->add_option("--rows", gen.cfg.n_rows, "Row count");
  generate->add_option("--rate", gen.cfg.positive_rate, "Lost-parcel rate");
  generate->add_option("--signal", gen.cfg.signal_strength, "Planted signal strength");
  generate->add_option("--numeric", gen.cfg.n_numeric, "Numeric features");
  generate->add_option("--boolean", gen.cfg.n_boolean, "Boolean features");
  generate->add_option("--categorical", gen.cfg.n_categorical, "Categorical features");

  PreprocessArgs pre;
  auto* preprocess = app.add_subcommand("preprocess", "One-hot encode and log-transform a raw CSV");
  preprocess->add_option("--data", pre.data, "Raw CSV")->required()->check(CLI::ExistingFile);
  preprocess->add_option("--schema", pre.schema, "Schema JSON (default <data>.schema.json)");
  preprocess->add_option("--max-categories", pre.max_categories, "Columns per categorical feature");
  preprocess->add_option("--log", pre.log_columns, "Columns to log1p (default: all numeric)");
  preprocess->add_flag("--no-log", pre.no_log, "Skip the log transform");

  SplitArgs sp;
  auto* split = app.add_subcommand("split", "Stratified train/validation/test split of an encoded CSV");
  split->add_option("--data", sp.data, "Encoded CSV")->required()->check(CLI::ExistingFile);
  split->add_option("--train", sp.spec.train_fraction, "Train fraction");
  split->add_option("--validation", sp.spec.validation_fraction, "Validation fraction");
  split->add_option("--test", sp.spec.test_fraction, "Test fraction");

  DbslArgs db;
  auto add_dbsl = [&](CLI::App* sub) {
    sub->add_option("--data", db.data, "Encoded CSV(s), concatenated")->required()->check(CLI::ExistingFile);
    sub->add_option("--resample", db.resample, "ru, nm or none");
    sub->add_option("--classifier", db.classifier, "dt, rf, xgb, lr, svm, ub, rus");
    sub->add_option("--base", db.base, "Member learner for ub/rus");
    sub->add_option("--ratio", db.ratio, "Minority/majority ratio after resampling");
    sub->add_option("--k,--k-neighbors", db.k_neighbors, "NearMiss neighbours");
    sub->add_option("--param", db.params, "Hyperparameter key=value (repeatable)");
  };
  auto* train_dbsl = app.add_subcommand("train-dbsl", "Resample then fit a supervised learner");
  add_dbsl(train_dbsl);
  auto* tune = app.add_subcommand("tune", "Random search with repeated stratified CV");
  add_dbsl(tune);
  tune->add_option("--candidates", db.candidates, "Sampled configurations");
  tune->add_option("--folds", db.folds, "CV folds");
  tune->add_option("--repeats", db.repeats, "CV repeats");
  tune->add_option("--objective", db.objective, "balanced_accuracy or roc_auc");

  DhelArgs dh;
  auto* train_dhel = app.add_subcommand("train-dhel", "Autoencoder on train normals, classifier on validation errors");
  train_dhel->alias("dhel-train");
  train_dhel->add_option("--train", dh.train, "Encoded train CSV")->required()->check(CLI::ExistingFile);
  train_dhel->add_option("--validation", dh.validation, "Encoded validation CSV")->required()->check(CLI::ExistingFile);
  train_dhel->add_option("--network", dh.network, "ae, vae or dae");
  train_dhel->add_option("--classifier", dh.classifier, "dt, rf, xgb, lr, svm");
  train_dhel->add_option("--param", dh.params, "Classifier hyperparameter key=value (repeatable)");
  train_dhel->add_option("--epochs", dh.epochs, "Autoencoder epochs");
  train_dhel->add_option("--candidates", dh.candidates, "Random search candidates (0 = no tuning)");
  train_dhel->add_option("--folds", dh.folds, "CV folds");
  train_dhel->add_option("--repeats", dh.repeats, "CV repeats");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Confusion matrix and metrics of a model on a CSV");
  evaluate->add_option("--model", ev.model, "Model JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--data", ev.data, "Encoded CSV")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--threshold", ev.threshold, "Score threshold (autoencoder: MSE above it is lost)");
  evaluate->add_option("--predictions", ev.predictions, "Write row_id,score,prediction,label CSV");
  evaluate->add_option("--name", ev.name, "Model label in the metrics CSV");

  ExplainArgs ex;
  auto* explain = app.add_subcommand("explain", "Shapley attributions, importance ranking, dependence curve");
  explain->add_option("--model", ex.model, "Model JSON")->required()->check(CLI::ExistingFile);
  explain->add_option("--data", ex.data, "Encoded CSV")->required()->check(CLI::ExistingFile);
  explain->add_option("--top", ex.top, "Features in the ranking");
  explain->add_option("--rows", ex.rows, "Rows explained");
  explain->add_option("--background", ex.background, "Background rows");
  explain->add_option("--permutations", ex.permutations, "Permutations per row");

  CostArgs co;
  auto* cost = app.add_subcommand("cost-report", "Misclassification cost per scenario");
  cost->add_option("--data", co.data, "Encoded CSV with stock_value and carrier columns")
      ->required()
      ->check(CLI::ExistingFile);
  cost->add_option("--rules", co.rules, "Insurance rule JSON (amounts in cents)")->check(CLI::ExistingFile);
  cost->add_option("--predictions", co.predictions, "Prediction CSVs from evaluate")->check(CLI::ExistingFile);

  std::vector<std::string> runs;
  auto* compare = app.add_subcommand("compare", "Mean and standard deviation across run records");
  compare->add_option("runs", runs, "Run directories or run_record.json files")->required()->expected(2, -1);

  std::string manifest;
  auto* run = app.add_subcommand("run", "Execute an experiment manifest end to end");
  run->add_option("--manifest", manifest, "Manifest JSON (default: --config)")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorKind::invalid_argument);
  }

  try {
    set_thread_count(g.threads);
    const bool config_given = !g.config.empty();
    if (generate->parsed()) cmd_generate(g, gen);
    else if (preprocess->parsed()) cmd_preprocess(g, pre);
    else if (split->parsed()) cmd_split(g, sp);
    else if (train_dbsl->parsed()) cmd_train_dbsl(g, db, config_given);
    else if (tune->parsed()) cmd_tune(g, db, config_given);
    else if (train_dhel->parsed()) cmd_train_dhel(g, dh, config_given);
    else if (evaluate->parsed()) cmd_evaluate(g, ev);
    else if (explain->parsed()) cmd_explain(g, ex);
    else if (cost->parsed()) cmd_cost_report(g, co);
    else if (compare->parsed()) cmd_compare(g, runs);
    else if (run->parsed()) cmd_run(g, manifest);
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return static_cast<int>(ErrorKind::io);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
