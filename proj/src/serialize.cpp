#include "parcel/serialize.hpp"

#include <fmt/format.h>

#include "parcel/error.hpp"

namespace parcel::io {

namespace {

template <typename F>
auto guarded(std::string_view what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw DataError(fmt::format("malformed {}: {}", what, e.what()));
  }
}

Json tree_json(const Tree& t) {
  Json nodes = Json::array();
  for (const auto& n : t.nodes)
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.gain, n.weight, n.samples, n.depth});
  return nodes;
}

Tree tree_from(const Json& j) {
  Tree t;
  for (const auto& a : j) {
    TreeNode n;
    n.feature = a.at(0).get<int>();
    n.threshold = a.at(1).get<double>();
    n.left = a.at(2).get<int>();
    n.right = a.at(3).get<int>();
    n.value = a.at(4).get<double>();
    n.gain = a.at(5).get<double>();
    n.weight = a.at(6).get<double>();
    n.samples = a.at(7).get<std::size_t>();
    n.depth = a.at(8).get<int>();
    t.nodes.push_back(n);
  }
  const auto count = static_cast<int>(t.nodes.size());
  for (const auto& n : t.nodes)
    if (!n.is_leaf() && (n.left < 0 || n.left >= count || n.right < 0 || n.right >= count))
      throw DataError("tree node points outside the tree");
  return t;
}

Json trees_json(const std::vector<Tree>& trees) {
  Json a = Json::array();
  for (const auto& t : trees) a.push_back(tree_json(t));
  return a;
}

std::vector<Tree> trees_from(const Json& j) {
  std::vector<Tree> out;
  for (const auto& t : j) out.push_back(tree_from(t));
  return out;
}

Json members_json(const std::vector<ClassifierModel>& members) {
  Json a = Json::array();
  for (const auto& m : members) a.push_back(to_json(m));
  return a;
}

std::vector<ClassifierModel> members_from(const Json& j) {
  std::vector<ClassifierModel> out;
  for (const auto& m : j) out.push_back(classifier_model_from_json(m));
  return out;
}

Json params_json(const FittedParams& params) {
  return std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TreeParams>) {
          return {{"type", "tree"}, {"tree", tree_json(p.tree)}};
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          return {{"type", "forest"}, {"trees", trees_json(p.trees)}};
        } else if constexpr (std::is_same_v<T, BoostingParams>) {
          return {{"type", "boosting"},           {"base_rate", p.base_rate},
                  {"base_margin", p.base_margin}, {"learning_rate", p.learning_rate},
                  {"stages", trees_json(p.stages)}, {"training_loss", p.training_loss}};
        } else if constexpr (std::is_same_v<T, LinearParams>) {
          return {{"type", "linear"}, {"weights", p.weights}, {"bias", p.bias}, {"hinge", p.hinge},
                  {"loss_history", p.loss_history}};
        } else if constexpr (std::is_same_v<T, BaggingParams>) {
          return {{"type", "bagging"}, {"members", members_json(p.members)}};
        } else {
          Json stages = Json::array();
          for (const auto& s : p.stages)
            stages.push_back({{"epsilon", s.epsilon}, {"alpha", s.alpha}, {"attempts", s.attempts},
                              {"accepted", s.accepted}});
          return {{"type", "adaboost"}, {"members", members_json(p.members)}, {"alphas", p.alphas},
                  {"stages", stages}};
        }
      },
      params);
}

FittedParams params_from(const Json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "tree") return TreeParams{tree_from(j.at("tree"))};
  if (type == "forest") return ForestParams{trees_from(j.at("trees"))};
  if (type == "boosting") {
    BoostingParams p;
    p.base_rate = j.at("base_rate").get<double>();
    p.base_margin = j.at("base_margin").get<double>();
    p.learning_rate = j.at("learning_rate").get<double>();
    p.stages = trees_from(j.at("stages"));
    p.training_loss = j.value("training_loss", std::vector<double>{});
    return p;
  }
  if (type == "linear") {
    LinearParams p;
    p.weights = j.at("weights").get<std::vector<double>>();
    p.bias = j.at("bias").get<double>();
    p.hinge = j.at("hinge").get<bool>();
    p.loss_history = j.value("loss_history", std::vector<double>{});
    return p;
  }
  if (type == "bagging") return BaggingParams{members_from(j.at("members"))};
  if (type == "adaboost") {
    AdaBoostParams p;
    p.members = members_from(j.at("members"));
    p.alphas = j.at("alphas").get<std::vector<double>>();
    for (const auto& s : j.at("stages"))
      p.stages.push_back({s.at("epsilon").get<double>(), s.at("alpha").get<double>(), s.at("attempts").get<int>(),
                          s.at("accepted").get<bool>()});
    if (p.alphas.size() != p.members.size()) throw DataError("adaboost alphas and members differ in length");
    return p;
  }
  throw DataError(fmt::format("unknown fitted parameter type '{}'", type));
}

}  // namespace

Json to_json(const ClassifierSpec& spec) {
  Json j{{"kind", std::string(to_string(spec.kind))}, {"params", spec.params}, {"seed", spec.seed}};
  if (spec.base_kind) j["base"] = std::string(to_string(*spec.base_kind));
  return j;
}

ClassifierSpec classifier_spec_from_json(const Json& j) {
  return guarded("classifier spec", [&] {
    ClassifierSpec s;
    s.kind = classifier_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("params")) s.params = j.at("params").get<Hyperparameters>();
    if (j.contains("base")) s.base_kind = classifier_kind_from_string(j.at("base").get<std::string>());
    s.seed = j.value("seed", std::uint64_t{0});
    s.validate();
    return s;
  });
}

Json to_json(const ResampleSpec& spec) {
  return {{"method", std::string(to_string(spec.method))},
          {"target_ratio", spec.target_ratio},
          {"k_neighbors", spec.k_neighbors},
          {"seed", spec.seed}};
}

ResampleSpec resample_spec_from_json(const Json& j) {
  return guarded("resample spec", [&] {
    ResampleSpec s;
    s.method = resample_method_from_string(j.at("method").get<std::string>());
    s.target_ratio = j.value("target_ratio", s.target_ratio);
    s.k_neighbors = j.value("k_neighbors", s.k_neighbors);
    s.seed = j.value("seed", s.seed);
    s.validate();
    return s;
  });
}

Json to_json(const DbslSpec& spec) {
  Json j{{"classifier", to_json(spec.classifier)}};
  j["resample"] = spec.resample ? to_json(*spec.resample) : Json(nullptr);
  return j;
}

DbslSpec dbsl_spec_from_json(const Json& j) {
  return guarded("dbsl spec", [&] {
    DbslSpec s;
    s.classifier = classifier_spec_from_json(j.at("classifier"));
    if (j.contains("resample") && !j.at("resample").is_null()) s.resample = resample_spec_from_json(j.at("resample"));
    return s;
  });
}

Json to_json(const NetworkSpec& s) {
  return {{"variant", std::string(to_string(s.variant))},
          {"input_features", s.input_features},
          {"hidden_layers", s.hidden_layers},
          {"latent_dim", s.latent_dim},
          {"boundary_activation", std::string(to_string(s.boundary_activation))},
          {"hidden_activation", std::string(to_string(s.hidden_activation))},
          {"dropout_rate", s.dropout_rate},
          {"noise_sigma", s.noise_sigma},
          {"kl_weight", s.kl_weight}};
}

NetworkSpec network_spec_from_json(const Json& j) {
  return guarded("network spec", [&] {
    NetworkSpec s = NetworkSpec::preset(autoencoder_variant_from_string(j.value("variant", std::string("ae"))));
    s.input_features = j.value("input_features", s.input_features);
    s.hidden_layers = j.value("hidden_layers", s.hidden_layers);
    s.latent_dim = j.value("latent_dim", s.latent_dim);
    if (j.contains("boundary_activation"))
      s.boundary_activation = activation_from_string(j.at("boundary_activation").get<std::string>());
    if (j.contains("hidden_activation"))
      s.hidden_activation = activation_from_string(j.at("hidden_activation").get<std::string>());
    s.dropout_rate = j.value("dropout_rate", s.dropout_rate);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.kl_weight = j.value("kl_weight", s.kl_weight);
    s.validate();
    return s;
  });
}

Json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},         {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
          {"adam_beta1", c.adam_beta1}, {"adam_beta2", c.adam_beta2}, {"adam_epsilon", c.adam_epsilon},
          {"seed", c.seed},             {"early_stop_patience", c.early_stop_patience}};
}

TrainConfig train_config_from_json(const Json& j) {
  return guarded("training config", [&] {
    TrainConfig c;
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.adam_epsilon = j.value("adam_epsilon", c.adam_epsilon);
    c.seed = j.value("seed", c.seed);
    c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
    c.validate();
    return c;
  });
}

Json to_json(const SearchSpec& s) {
  Json ranges = Json::object();
  for (const auto& [name, range] : s.ranges) {
    ranges[name] = std::visit(
        [](const auto& r) -> Json {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, ChoiceRange>) return {{"choice", r.values}};
          else if constexpr (std::is_same_v<T, IntRange>) return {{"int", {r.lo, r.hi}}};
          else if constexpr (std::is_same_v<T, UniformRange>) return {{"uniform", {r.lo, r.hi}}};
          else return {{"log_uniform", {r.lo, r.hi}}};
        },
        range);
  }
  return {{"ranges", ranges},  {"n_candidates", s.n_candidates},
          {"folds", s.folds},  {"repeats", s.repeats},
          {"objective", std::string(to_string(s.objective))}, {"seed", s.seed}};
}

SearchSpec search_spec_from_json(const Json& j) {
  return guarded("search spec", [&] {
    SearchSpec s;
    if (j.contains("ranges")) {
      for (const auto& [name, r] : j.at("ranges").items()) {
        if (r.contains("choice")) s.ranges[name] = ChoiceRange{r.at("choice").get<std::vector<double>>()};
        else if (r.contains("int")) s.ranges[name] = IntRange{r.at("int").at(0).get<long>(), r.at("int").at(1).get<long>()};
        else if (r.contains("uniform"))
          s.ranges[name] = UniformRange{r.at("uniform").at(0).get<double>(), r.at("uniform").at(1).get<double>()};
        else if (r.contains("log_uniform"))
          s.ranges[name] =
              LogUniformRange{r.at("log_uniform").at(0).get<double>(), r.at("log_uniform").at(1).get<double>()};
        else throw InvalidArgument(fmt::format("range '{}' needs choice, int, uniform or log_uniform", name));
      }
    }
    s.n_candidates = j.value("n_candidates", s.n_candidates);
    s.folds = j.value("folds", s.folds);
    s.repeats = j.value("repeats", s.repeats);
    if (j.contains("objective")) s.objective = objective_from_string(j.at("objective").get<std::string>());
    s.seed = j.value("seed", s.seed);
    return s;
  });
}

Json to_json(const DhelSpec& s) {
  return {{"network", to_json(s.network)},
          {"training", to_json(s.training)},
          {"classifier", to_json(s.classifier)},
          {"search", to_json(s.search)},
          {"seed", s.seed}};
}

DhelSpec dhel_spec_from_json(const Json& j) {
  return guarded("dhel spec", [&] {
    DhelSpec s = DhelSpec::defaults();
    if (j.contains("network")) s.network = network_spec_from_json(j.at("network"));
    if (j.contains("training")) s.training = train_config_from_json(j.at("training"));
    if (j.contains("classifier")) s.classifier = classifier_spec_from_json(j.at("classifier"));
    if (j.contains("search")) s.search = search_spec_from_json(j.at("search"));
    s.seed = j.value("seed", s.seed);
    return s;
  });
}

Json to_json(const InsuranceRuleTable& rules) {
  Json partners = Json::object();
  for (const auto& [name, tiers] : rules.partners) {
    Json a = Json::array();
    for (const auto& t : tiers)
      a.push_back({{"lower_bound", t.lower_bound.value}, {"insured_value", t.insured_value.value},
                   {"premium", t.premium.value}});
    partners[name] = a;
  }
  return {{"currency", "cents"},
          {"uninsured_threshold", rules.uninsured_threshold.value},
          {"gated_categories", rules.gated_categories},
          {"partners", partners}};
}

InsuranceRuleTable insurance_rules_from_json(const Json& j) {
  return guarded("insurance rules", [&] {
    InsuranceRuleTable r;
    if (j.value("currency", std::string("cents")) != "cents") throw InvalidArgument("rule amounts must be in cents");
    r.uninsured_threshold.value = j.value("uninsured_threshold", r.uninsured_threshold.value);
    if (j.contains("gated_categories")) r.gated_categories = j.at("gated_categories").get<std::set<std::string>>();
    for (const auto& [name, tiers] : j.at("partners").items()) {
      auto& out = r.partners[name];
      for (const auto& t : tiers)
        out.push_back({{t.at("lower_bound").get<std::int64_t>()},
                       {t.value("insured_value", std::int64_t{0})},
                       {t.at("premium").get<std::int64_t>()}});
    }
    r.validate();
    return r;
  });
}

Json to_json(const SearchResult& result) {
  Json trace = Json::array();
  for (const auto& t : result.trace) {
    Json e{{"candidate", t.candidate}};
    e["score"] = t.score ? Json(*t.score) : Json(nullptr);
    if (!t.error.empty()) e["error"] = t.error;
    trace.push_back(std::move(e));
  }
  return {{"best_index", result.best_index}, {"best", result.best}, {"best_score", result.best_score}, {"trace", trace}};
}

namespace {

SearchResult search_result_from(const Json& j) {
  SearchResult r;
  r.best_index = j.value("best_index", std::size_t{0});
  r.best = j.value("best", Candidate{});
  r.best_score = j.value("best_score", 0.0);
  if (j.contains("trace")) {
    for (const auto& e : j.at("trace")) {
      TraceEntry t;
      t.candidate = e.at("candidate").get<Candidate>();
      if (!e.at("score").is_null()) t.score = e.at("score").get<double>();
      t.error = e.value("error", std::string());
      r.trace.push_back(std::move(t));
    }
  }
  return r;
}

}  // namespace

Json to_json(const ClassifierModel& model) {
  return {{"spec", to_json(model.spec())}, {"feature_count", model.feature_count()}, {"fitted", params_json(model.params())}};
}

ClassifierModel classifier_model_from_json(const Json& j) {
  return guarded("classifier model", [&] {
    return ClassifierModel(classifier_spec_from_json(j.at("spec")), j.at("feature_count").get<std::size_t>(),
                           params_from(j.at("fitted")));
  });
}

Json to_json(const AutoencoderModel& m) {
  return {{"spec", to_json(m.spec)},
          {"parameters", m.parameters},
          {"selected_feature_indices", m.selected_feature_indices},
          {"input_min", m.input_min},
          {"input_range", m.input_range},
          {"loss_history", m.loss_history}};
}

AutoencoderModel autoencoder_model_from_json(const Json& j) {
  return guarded("autoencoder model", [&] {
    AutoencoderModel m;
    m.spec = network_spec_from_json(j.at("spec"));
    m.parameters = j.at("parameters").get<std::vector<double>>();
    m.selected_feature_indices = j.value("selected_feature_indices", std::vector<std::size_t>{});
    m.input_min = j.at("input_min").get<std::vector<double>>();
    m.input_range = j.at("input_range").get<std::vector<double>>();
    m.loss_history = j.value("loss_history", std::vector<double>{});
    if (m.parameters.size() != m.network().parameter_count())
      throw DataError(fmt::format("autoencoder has {} parameters, its spec needs {}", m.parameters.size(),
                                  m.network().parameter_count()));
    if (m.input_min.size() != m.spec.input_features || m.input_range.size() != m.spec.input_features)
      throw DataError("autoencoder scaling does not match its input width");
    return m;
  });
}

Json to_json(const DhelModel& m) {
  const auto& p = m.provenance;
  return {{"autoencoder", to_json(m.autoencoder)},
          {"classifier", to_json(m.classifier)},
          {"selected_feature_indices", m.selected_feature_indices},
          {"selected_feature_names", m.selected_feature_names},
          {"input_width", m.input_width},
          {"provenance",
           {{"autoencoder_rows", p.autoencoder_rows},
            {"classifier_rows", p.classifier_rows},
            {"feature_selection_rows", p.feature_selection_rows},
            {"autoencoder_rows_all_normal", p.autoencoder_rows_all_normal}}},
          {"search", to_json(m.search)}};
}

DhelModel dhel_model_from_json(const Json& j) {
  return guarded("dhel model", [&] {
    DhelModel m;
    m.autoencoder = autoencoder_model_from_json(j.at("autoencoder"));
    m.classifier = classifier_model_from_json(j.at("classifier"));
    m.selected_feature_indices = j.at("selected_feature_indices").get<std::vector<std::size_t>>();
    m.selected_feature_names = j.at("selected_feature_names").get<std::vector<std::string>>();
    m.input_width = j.at("input_width").get<std::size_t>();
    const auto& p = j.at("provenance");
    m.provenance.autoencoder_rows = p.at("autoencoder_rows").get<std::vector<std::uint64_t>>();
    m.provenance.classifier_rows = p.at("classifier_rows").get<std::vector<std::uint64_t>>();
    m.provenance.feature_selection_rows = p.at("feature_selection_rows").get<std::vector<std::uint64_t>>();
    m.provenance.autoencoder_rows_all_normal = p.at("autoencoder_rows_all_normal").get<bool>();
    if (j.contains("search")) m.search = search_result_from(j.at("search"));
    for (auto idx : m.selected_feature_indices)
      if (idx >= m.input_width) throw DataError("DHEL feature index outside the input width");
    return m;
  });
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
  Json j{{"format", kModelFormat}, {"version", kModelVersion}, {"columns", file.columns}};
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ClassifierModel>) j["type"] = "classifier";
        else if constexpr (std::is_same_v<T, AutoencoderModel>) j["type"] = "autoencoder";
        else j["type"] = "dhel";
        j["model"] = to_json(m);
      },
      file.model);
  write_json(path, j);
}

ModelFile load_model(const std::filesystem::path& path) {
  const Json j = read_json(path);
  return guarded("model file", [&] {
    if (j.value("format", std::string()) != kModelFormat)
      throw DataError(fmt::format("'{}' is not a {} file", path.string(), kModelFormat));
    if (j.at("version").get<int>() != kModelVersion)
      throw DataError(fmt::format("unsupported model file version {}", j.at("version").dump()));
    ModelFile f;
    f.columns = j.at("columns").get<std::vector<std::string>>();
    const auto type = j.at("type").get<std::string>();
    if (type == "classifier") f.model = classifier_model_from_json(j.at("model"));
    else if (type == "autoencoder") f.model = autoencoder_model_from_json(j.at("model"));
    else if (type == "dhel") f.model = dhel_model_from_json(j.at("model"));
    else throw DataError(fmt::format("unknown model type '{}'", type));
    return f;
  });
}

std::vector<double> model_scores(const ModelFile& file, const Matrix& rows) {
  if (static_cast<std::size_t>(rows.cols()) != file.columns.size())
    throw InvalidArgument(fmt::format("model expects {} columns, got {}", file.columns.size(), rows.cols()));
  return std::visit(
      [&](const auto& m) -> std::vector<double> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ClassifierModel>) return score(m, rows);
        else if constexpr (std::is_same_v<T, DhelModel>) return dhel_score(m, rows);
        else {
          Matrix sel(rows.rows(), static_cast<Eigen::Index>(m.selected_feature_indices.size()));
          for (std::size_t k = 0; k < m.selected_feature_indices.size(); ++k)
            sel.col(static_cast<Eigen::Index>(k)) = rows.col(static_cast<Eigen::Index>(m.selected_feature_indices[k]));
          return reconstruction_mses(m, sel);
        }
      },
      file.model);
}

std::vector<int> model_predictions(const ModelFile& file, const Matrix& rows) {
  if (std::holds_alternative<AutoencoderModel>(file.model))
    throw InvalidArgument("a bare autoencoder needs a threshold rule to predict labels");
  if (const auto* c = std::get_if<ClassifierModel>(&file.model)) return predict(*c, rows);
  return dhel_predict(std::get<DhelModel>(file.model), rows);
}

LabeledTable align_columns(const LabeledTable& table, const std::vector<std::string>& columns) {
  if (table.columns() == columns) return table;
  std::vector<std::size_t> idx;
  for (const auto& c : columns) {
    const auto i = table.column_index(c);
    if (!i) throw DataError(fmt::format("data has no column '{}' required by the model", c));
    idx.push_back(*i);
  }
  return table.select_columns(idx);
}

Json table_meta(const LabeledTable& table) {
  Json groups = Json::array();
  for (const auto& g : table.one_hot_groups())
    groups.push_back({{"feature", g.feature}, {"first_column", g.first_column}, {"width", g.width}});
  return {{"one_hot_groups", groups}, {"log_columns", table.log_columns()}};
}

void apply_table_meta(LabeledTable& table, const Json& meta) {
  guarded("table meta", [&] {
    std::vector<OneHotGroup> groups;
    for (const auto& g : meta.at("one_hot_groups")) {
      OneHotGroup og{g.at("feature").get<std::string>(), g.at("first_column").get<std::size_t>(),
                     g.at("width").get<std::size_t>()};
      if (og.first_column + og.width > table.cols()) throw DataError("one-hot group outside the table");
      groups.push_back(og);
    }
    table.set_one_hot_groups(std::move(groups));
    table.set_log_columns(meta.at("log_columns").get<std::vector<std::string>>());
    return 0;
  });
}

std::filesystem::path meta_path(const std::filesystem::path& csv) {
  auto p = csv;
  p += ".meta.json";
  return p;
}

void save_table(const std::filesystem::path& path, const LabeledTable& table) {
  write_table_csv(path, table);
  write_json(meta_path(path), table_meta(table));
}

LabeledTable load_table(const std::filesystem::path& path) {
  auto t = read_table_csv(path);
  if (std::filesystem::exists(meta_path(path))) apply_table_meta(t, read_json(meta_path(path)));
  return t;
}

}  // namespace parcel::io
