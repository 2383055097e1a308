#include "parcel/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "parcel/error.hpp"
#include "parcel/explain.hpp"
#include "parcel/serialize.hpp"

namespace parcel {

std::string_view to_string(PipelineKind kind) {
  switch (kind) {
    case PipelineKind::dbsl: return "dbsl";
    case PipelineKind::dhel: return "dhel";
    case PipelineKind::baseline: return "baseline";
  }
  return "?";
}

PipelineKind pipeline_kind_from_string(std::string_view name) {
  if (name == "dbsl") return PipelineKind::dbsl;
  if (name == "dhel") return PipelineKind::dhel;
  if (name == "baseline") return PipelineKind::baseline;
  throw InvalidArgument(fmt::format("unknown pipeline '{}'", name));
}

void ExperimentManifest::validate() const {
  const int sources = (data.synthetic ? 1 : 0) + (data.raw_csv.empty() ? 0 : 1) + (data.encoded_csv.empty() ? 0 : 1);
  if (sources != 1) throw InvalidArgument("manifest needs exactly one data source");
  if (data.synthetic) data.synthetic->validate();
  if (!data.raw_csv.empty() && data.schema.empty()) throw InvalidArgument("raw_csv data needs a schema file");
  if (preprocess.max_categories < 2) throw InvalidArgument("max_categories must be >= 2");
  split.validate();
  if (pipeline == PipelineKind::dbsl) dbsl.classifier.validate();
  if (pipeline == PipelineKind::dhel) dhel.validate();
  if (search.n_candidates > 0) search.validate();
  if (rules) rules->validate();
  if (output_dir.empty()) throw InvalidArgument("output_dir must be set");
}

io::Json to_json(const ExperimentManifest& m) {
  io::Json data;
  if (m.data.synthetic) data["synthetic"] = io::to_json(*m.data.synthetic);
  if (!m.data.raw_csv.empty()) {
    data["raw_csv"] = m.data.raw_csv.string();
    data["schema"] = m.data.schema.string();
  }
  if (!m.data.encoded_csv.empty()) data["encoded_csv"] = m.data.encoded_csv.string();
  io::Json pre{{"max_categories", m.preprocess.max_categories}};
  if (m.preprocess.log_columns) pre["log_columns"] = *m.preprocess.log_columns;
  io::Json pipeline{{"type", std::string(to_string(m.pipeline))}};
  if (m.pipeline == PipelineKind::dbsl) pipeline["dbsl"] = io::to_json(m.dbsl);
  if (m.pipeline == PipelineKind::dhel) pipeline["dhel"] = io::to_json(m.dhel);
  io::Json j{{"version", kManifestVersion},
             {"name", m.name},
             {"data", data},
             {"preprocess", pre},
             {"split", io::to_json(m.split)},
             {"pipeline", pipeline},
             {"search", io::to_json(m.search)},
             {"explain",
              {{"rows", m.explain.rows},
               {"background", m.explain.background},
               {"permutations", m.explain.permutations},
               {"top", m.explain.top}}},
             {"output_dir", m.output_dir.string()},
             {"seed", m.seed}};
  if (m.rules) j["rules"] = io::to_json(*m.rules);
  return j;
}

ExperimentManifest manifest_from_json(const io::Json& j, const std::filesystem::path& base) {
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
  };
  try {
    ExperimentManifest m;
    if (j.value("version", kManifestVersion) != kManifestVersion)
      throw DataError(fmt::format("unsupported manifest version {}", j.at("version").dump()));
    m.name = j.value("name", std::string());
    const auto& data = j.at("data");
    if (data.contains("synthetic")) m.data.synthetic = io::synthetic_config_from_json(data.at("synthetic"));
    if (data.contains("raw_csv")) m.data.raw_csv = resolve(data.at("raw_csv").get<std::string>());
    if (data.contains("schema")) m.data.schema = resolve(data.at("schema").get<std::string>());
    if (data.contains("encoded_csv")) m.data.encoded_csv = resolve(data.at("encoded_csv").get<std::string>());
    if (j.contains("preprocess")) {
      const auto& p = j.at("preprocess");
      m.preprocess.max_categories = p.value("max_categories", m.preprocess.max_categories);
      if (p.contains("log_columns")) m.preprocess.log_columns = p.at("log_columns").get<std::vector<std::string>>();
    }
    if (j.contains("split")) m.split = io::split_spec_from_json(j.at("split"));
    const auto& pipeline = j.at("pipeline");
    m.pipeline = pipeline_kind_from_string(pipeline.at("type").get<std::string>());
    if (pipeline.contains("dbsl")) m.dbsl = io::dbsl_spec_from_json(pipeline.at("dbsl"));
    if (pipeline.contains("dhel")) m.dhel = io::dhel_spec_from_json(pipeline.at("dhel"));
    if (j.contains("search")) {
      m.search = io::search_spec_from_json(j.at("search"));
      if (!j.at("search").contains("n_candidates")) m.search.n_candidates = 0;
    }
    if (j.contains("rules")) m.rules = io::insurance_rules_from_json(j.at("rules"));
    if (j.contains("explain")) {
      const auto& e = j.at("explain");
      m.explain.rows = e.value("rows", m.explain.rows);
      m.explain.background = e.value("background", m.explain.background);
      m.explain.permutations = e.value("permutations", m.explain.permutations);
      m.explain.top = e.value("top", m.explain.top);
    }
    m.output_dir = resolve(j.value("output_dir", std::string("run")));
    m.seed = j.value("seed", std::uint64_t{0});
    m.validate();
    return m;
  } catch (const io::Json::exception& e) {
    throw DataError(fmt::format("malformed manifest: {}", e.what()));
  }
}

ExperimentManifest load_manifest(const std::filesystem::path& path) {
  return manifest_from_json(io::read_json(path), path.parent_path());
}

std::uint64_t manifest_hash(const ExperimentManifest& m) {
  const auto text = to_json(m).dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

std::string opt_json_key(const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); }

io::Json opt(const std::optional<double>& v) { return v ? io::Json(*v) : io::Json(nullptr); }

std::optional<double> opt_from(const io::Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::string abbreviation(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::decision_tree: return "DT";
    case ClassifierKind::random_forest: return "RF";
    case ClassifierKind::gradient_boosting: return "XGB";
    case ClassifierKind::logistic_regression: return "LR";
    case ClassifierKind::linear_svm: return "SVM";
    case ClassifierKind::underbagging: return "UB";
    case ClassifierKind::rusboost: return "RUS";
  }
  return "?";
}

}  // namespace

io::Json to_json(const RunRecord& r) {
  io::Json metrics = io::Json::array();
  for (const auto& m : r.metrics)
    metrics.push_back({{"model", m.model},
                       {"tp", m.counts.tp},
                       {"fp", m.counts.fp},
                       {"fn", m.counts.fn},
                       {"tn", m.counts.tn},
                       {"precision", opt(m.report.precision)},
                       {"recall", opt(m.report.recall)},
                       {"tnr", opt(m.report.tnr)},
                       {"balanced_accuracy", opt(m.report.balanced_accuracy)},
                       {"roc_auc", opt(m.report.roc_auc)}});
  io::Json costs = io::Json::array();
  for (const auto& c : r.costs)
    costs.push_back({{"scenario", c.scenario}, {"fp_cost", c.fp_cost.value}, {"fn_cost", c.fn_cost.value},
                     {"total", c.total.value}});
  return {{"manifest_hash", r.manifest_hash}, {"tool_version", r.tool_version}, {"pipeline", r.pipeline},
          {"timings", r.timings},             {"metrics", metrics},             {"costs", costs},
          {"artifacts", r.artifacts}};
}

RunRecord run_record_from_json(const io::Json& j) {
  try {
    RunRecord r;
    r.manifest_hash = j.at("manifest_hash").get<std::string>();
    r.tool_version = j.value("tool_version", std::string());
    r.pipeline = j.value("pipeline", std::string());
    r.timings = j.value("timings", std::map<std::string, double>{});
    for (const auto& m : j.at("metrics")) {
      ModelMetrics mm;
      mm.model = m.at("model").get<std::string>();
      mm.counts = {m.at("tp").get<std::uint64_t>(), m.at("fp").get<std::uint64_t>(), m.at("fn").get<std::uint64_t>(),
                   m.at("tn").get<std::uint64_t>()};
      mm.report.precision = opt_from(m, "precision");
      mm.report.recall = opt_from(m, "recall");
      mm.report.tnr = opt_from(m, "tnr");
      mm.report.balanced_accuracy = opt_from(m, "balanced_accuracy");
      mm.report.roc_auc = opt_from(m, "roc_auc");
      r.metrics.push_back(std::move(mm));
    }
    if (j.contains("costs")) {
      for (const auto& c : j.at("costs")) {
        CostReport cr;
        cr.scenario = c.at("scenario").get<std::string>();
        cr.fp_cost.value = c.at("fp_cost").get<std::int64_t>();
        cr.fn_cost.value = c.at("fn_cost").get<std::int64_t>();
        cr.total.value = c.at("total").get<std::int64_t>();
        r.costs.push_back(std::move(cr));
      }
    }
    r.artifacts = j.value("artifacts", std::vector<std::string>{});
    return r;
  } catch (const io::Json::exception& e) {
    throw DataError(fmt::format("malformed run record: {}", e.what()));
  }
}

LabeledTable load_experiment_data(const ExperimentManifest& m) {
  if (!m.data.encoded_csv.empty()) return io::load_table(m.data.encoded_csv);
  RawTable raw;
  if (m.data.synthetic) {
    auto cfg = *m.data.synthetic;
    cfg.seed = derive_seed(m.seed, "synthetic");
    raw = generate_synthetic(cfg);
  } else {
    raw = io::read_raw_csv(m.data.raw_csv, io::schema_from_json(io::read_json(m.data.schema)));
  }
  auto table = encode_one_hot(raw, m.preprocess.max_categories);
  const auto logged = m.preprocess.log_columns.value_or(numeric_feature_names(raw.schema));
  return logged.empty() ? table : log_transform(table, logged);
}

std::string pipeline_label(const ExperimentManifest& m) {
  if (!m.name.empty()) return m.name;
  switch (m.pipeline) {
    case PipelineKind::baseline: return "business_rules";
    case PipelineKind::dhel: {
      std::string v(to_string(m.dhel.network.variant));
      for (auto& c : v) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      return v + "-" + abbreviation(m.dhel.classifier.kind);
    }
    case PipelineKind::dbsl: {
      const auto& c = m.dbsl.classifier;
      std::string label = abbreviation(c.kind);
      if (c.base_kind) label += "-" + abbreviation(*c.base_kind);
      if (m.dbsl.resample)
        label = (m.dbsl.resample->method == ResampleMethod::near_miss_1 ? "NM-" : "RU-") + label;
      return label;
    }
  }
  return "model";
}

namespace {

class StageTimer {
 public:
  StageTimer(RunRecord& record, std::string stage)
      : record_(record), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    record_.timings[stage_] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  RunRecord& record_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

template <typename F>
auto stage(RunRecord& record, const std::string& name, F&& f) {
  StageTimer timer(record, name);
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("stage '{}': {}", name, e.what()));
  } catch (const std::exception& e) {
    throw Error(ErrorKind::training, fmt::format("stage '{}': {}", name, e.what()));
  }
}

ModelMetrics evaluate(const std::string& name, std::span<const int> labels, std::span<const int> predicted,
                      std::span<const double> scores) {
  ModelMetrics m;
  m.model = name;
  m.counts = confusion(labels, predicted);
  m.report = metrics(m.counts, scores, labels);
  return m;
}

bool supports_costs(const LabeledTable& t) {
  if (!t.column_index("stock_value")) return false;
  for (const auto& g : t.one_hot_groups())
    if (g.feature == "carrier") return true;
  return false;
}


}  // namespace

std::string metrics_csv(const std::vector<ModelMetrics>& metrics) {
  std::string out = "model,tp,fp,fn,tn,precision,recall,tnr,balanced_accuracy,roc_auc\n";
  for (const auto& m : metrics)
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", m.model, m.counts.tp, m.counts.fp, m.counts.fn, m.counts.tn,
                       opt_json_key(m.report.precision), opt_json_key(m.report.recall), opt_json_key(m.report.tnr),
                       opt_json_key(m.report.balanced_accuracy), opt_json_key(m.report.roc_auc));
  return out;
}

std::string costs_csv(const std::vector<CostReport>& costs) {
  std::string out = "scenario,tp,fp,fn,tn,fp_cost,fn_cost,total_cost\n";
  for (const auto& c : costs)
    out += fmt::format("{},{},{},{},{},{},{},{}\n", c.scenario, c.counts.tp, c.counts.fp, c.counts.fn, c.counts.tn,
                       format_cents(c.fp_cost), format_cents(c.fn_cost), format_cents(c.total));
  return out;
}

std::string search_trace_csv(const SearchResult& result) {
  std::vector<std::string> keys;
  for (const auto& t : result.trace)
    for (const auto& [k, v] : t.candidate)
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  std::string out = "candidate";
  for (const auto& k : keys) out += "," + k;
  out += ",score,error\n";
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    const auto& t = result.trace[i];
    out += std::to_string(i);
    for (const auto& k : keys) {
      auto it = t.candidate.find(k);
      out += "," + (it == t.candidate.end() ? std::string() : io::format_double(it->second));
    }
    std::string err = t.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += "," + (t.score ? io::format_double(*t.score) : std::string()) + "," + err + "\n";
  }
  return out;
}

RunRecord run_experiment(const ExperimentManifest& m) {
  m.validate();
  RunRecord record;
  record.manifest_hash = fmt::format("{:016x}", manifest_hash(m));
  record.pipeline = std::string(to_string(m.pipeline));
  const auto& dir = m.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  auto artifact = [&](const std::string& name) {
    record.artifacts.push_back(name);
    return dir / name;
  };

  const auto table = stage(record, "data", [&] { return load_experiment_data(m); });
  SplitSpec split_spec = m.split;
  split_spec.seed = derive_seed(m.seed, "split");
  const auto idx = stage(record, "split", [&] { return stratified_split_indices(table, split_spec); });
  const auto train = table.subset(idx.train);
  const auto validation = table.subset(idx.validation);
  const auto test = table.subset(idx.test);
  const std::string label = pipeline_label(m);

  std::optional<io::ModelFile> model_file;
  std::optional<SearchResult> search_result;
  stage(record, "train", [&] {
    if (m.pipeline == PipelineKind::dbsl) {
      auto full_idx = idx.train;
      full_idx.insert(full_idx.end(), idx.validation.begin(), idx.validation.end());
      std::sort(full_idx.begin(), full_idx.end());
      const auto full = table.subset(full_idx);
      DbslSpec spec = m.dbsl;
      spec.classifier.seed = derive_seed(m.seed, "classifier");
      if (spec.resample) spec.resample->seed = derive_seed(m.seed, "resample");
      if (m.search.n_candidates > 0) {
        SearchSpec search = m.search;
        search.seed = derive_seed(m.seed, "search");
        auto tuned = tune_dbsl(full, spec, search);
        spec = tuned.spec;
        search_result = std::move(tuned.search);
      }
      model_file = io::ModelFile{table.columns(), fit_dbsl(full, spec)};
    } else if (m.pipeline == PipelineKind::dhel) {
      DhelSpec spec = m.dhel;
      spec.seed = derive_seed(m.seed, "dhel");
      if (m.search.n_candidates > 0) spec.search = m.search;
      auto model = train_dhel(train, validation, spec);
      verify_provenance(model, &test);
      if (spec.search.n_candidates > 0) search_result = model.search;
      model_file = io::ModelFile{table.columns(), std::move(model)};
    }
    return 0;
  });

  std::vector<double> test_scores;
  std::vector<int> test_predicted;
  stage(record, "evaluate", [&] {
    if (model_file) {
      test_scores = io::model_scores(*model_file, test.matrix());
      test_predicted = io::model_predictions(*model_file, test.matrix());
      record.metrics.push_back(evaluate(label, test.labels(), test_predicted, test_scores));
    }
    return 0;
  });

  const bool costs = supports_costs(table);
  const InsuranceRuleTable rules = m.rules.value_or(InsuranceRuleTable::example());
  if (!costs && m.pipeline == PipelineKind::baseline)
    throw DataError("stage 'evaluate': the baseline needs stock_value and carrier columns");
  if (costs) {
    stage(record, "cost", [&] {
      const auto parcels = parcels_from_table(test);
      const auto rule_pred = business_rule_predict(parcels, rules);
      const std::vector<double> rule_scores(rule_pred.begin(), rule_pred.end());
      record.metrics.push_back(evaluate("business_rules", test.labels(), rule_pred, rule_scores));
      std::map<std::string, std::vector<int>> models;
      if (model_file) models[label] = test_predicted;
      record.costs = scenario_costs(parcels, rules, models);
      return 0;
    });
  }

  io::write_text(artifact("metrics.csv"), metrics_csv(record.metrics));
  if (model_file) io::save_model(artifact("model.json"), *model_file);
  if (search_result) io::write_text(artifact("search_trace.csv"), search_trace_csv(*search_result));
  if (!record.costs.empty()) io::write_text(artifact("cost_report.csv"), costs_csv(record.costs));

  if (model_file && m.explain.rows > 0) {
    stage(record, "explain", [&] {
      const auto scorer = [&](const Matrix& rows) { return io::model_scores(*model_file, rows); };
      const Matrix background = background_sample(train, m.explain.background, derive_seed(m.seed, "background"));
      const auto n = std::min<std::size_t>(m.explain.rows, test.rows());
      const Matrix rows = test.matrix().topRows(static_cast<Eigen::Index>(n));
      const Matrix phi = attribution_matrix(scorer, background, rows, m.explain.permutations,
                                            derive_seed(m.seed, "explain"));
      io::CsvDocument doc;
      doc.header = table.columns();
      for (Eigen::Index i = 0; i < phi.rows(); ++i) {
        std::vector<std::string> cells;
        for (Eigen::Index j = 0; j < phi.cols(); ++j) cells.push_back(io::format_double(phi(i, j)));
        doc.rows.push_back(std::move(cells));
      }
      io::write_csv(artifact("attributions.csv"), doc);
      const auto ranked = importance_summary(phi, table.columns());
      std::string imp = "rank,feature,mean_abs_attribution\n";
      for (std::size_t r = 0; r < std::min(ranked.size(), m.explain.top); ++r)
        imp += fmt::format("{},{},{}\n", r + 1, ranked[r].name, io::format_double(ranked[r].mean_abs));
      io::write_text(artifact("importance.csv"), imp);
      return 0;
    });
  }

  std::string summary = fmt::format("pipeline {} ({}), manifest {}\n", record.pipeline, label, record.manifest_hash);
  summary += fmt::format("rows {} (train {}, validation {}, test {}), test positives {}\n", table.rows(), train.rows(),
                         validation.rows(), test.rows(), test.positives());
  for (const auto& mm : record.metrics)
    summary += fmt::format("{:<16} BA {:.3f}  recall {:.3f}  TNR {:.3f}  AUC {:.3f}\n", mm.model,
                           mm.report.balanced_accuracy.value_or(NAN), mm.report.recall.value_or(NAN),
                           mm.report.tnr.value_or(NAN), mm.report.roc_auc.value_or(NAN));
  for (const auto& c : record.costs) summary += fmt::format("cost {:<16} {}\n", c.scenario, format_cents(c.total));
  io::write_text(artifact("summary.txt"), summary);
  record.artifacts.push_back("run_record.json");
  io::write_json(dir / "run_record.json", to_json(record));
  return record;
}

std::vector<ComparisonRow> compare_runs(const std::vector<RunRecord>& records) {
  if (records.size() < 2) throw InvalidArgument("compare needs at least two run records");
  std::vector<std::string> models;
  for (const auto& mm : records.front().metrics) models.push_back(mm.model);
  auto value = [](const MetricReport& r, const std::string& key) -> std::optional<double> {
    if (key == "precision") return r.precision;
    if (key == "recall") return r.recall;
    if (key == "tnr") return r.tnr;
    if (key == "balanced_accuracy") return r.balanced_accuracy;
    return r.roc_auc;
  };
  std::vector<ComparisonRow> rows;
  for (const auto& model : models) {
    ComparisonRow row;
    row.model = model;
    std::map<std::string, std::vector<double>> samples;
    for (const auto& rec : records) {
      auto it = std::find_if(rec.metrics.begin(), rec.metrics.end(),
                             [&](const ModelMetrics& mm) { return mm.model == model; });
      if (it == rec.metrics.end())
        throw DataError(fmt::format("run {} has no metrics for model '{}'", rec.manifest_hash, model));
      for (const auto& key : kComparedMetrics)
        if (auto v = value(it->report, key)) samples[key].push_back(*v);
    }
    for (const auto& rec : records)
      if (rec.metrics.size() != models.size()) throw DataError("run records report different model sets");
    row.runs = records.size();
    for (const auto& [key, xs] : samples) {
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      double ss = 0.0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      const double sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
      row.stats[key] = {mean, sd};
    }
    rows.push_back(std::move(row));
  }
  auto ba = [](const ComparisonRow& r) {
    auto it = r.stats.find("balanced_accuracy");
    return it == r.stats.end() ? -1.0 : it->second.first;
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) { return ba(a) > ba(b); });
  return rows;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string out = "model,runs";
  for (const auto& k : kComparedMetrics) out += fmt::format(",{}_mean,{}_sd", k, k);
  out += "\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{}", r.model, r.runs);
    for (const auto& k : kComparedMetrics) {
      auto it = r.stats.find(k);
      if (it == r.stats.end()) out += ",,";
      else out += fmt::format(",{:.6f},{:.6f}", it->second.first, it->second.second);
    }
    out += "\n";
  }
  return out;
}

std::string comparison_text(const std::vector<ComparisonRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += fmt::format("{:<16}", r.model);
    for (const auto& [key, name] : std::vector<std::pair<std::string, std::string>>{
             {"recall", "recall"}, {"tnr", "TNR"}, {"precision", "precision"}, {"balanced_accuracy", "BA"}}) {
      auto it = r.stats.find(key);
      if (it == r.stats.end()) out += fmt::format("  {} n/a", name);
      else out += fmt::format("  {} {:.3f} ± {:.3f}", name, it->second.first, it->second.second);
    }
    out += "\n";
  }
  return out;
}

}  // namespace parcel
