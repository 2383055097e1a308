#include <fstream>

#include "doctest.h"
#include "support.hpp"

#include "parcel/error.hpp"
#include "parcel/serialize.hpp"

using namespace parcel;

namespace {

ClassifierSpec spec_of(ClassifierKind kind, Hyperparameters params, std::optional<ClassifierKind> base = std::nullopt) {
  ClassifierSpec s;
  s.kind = kind;
  s.params = std::move(params);
  s.base_kind = base;
  s.seed = 12;
  return s;
}

template <class M>
M file_round_trip(const std::string& name, const M& model, const std::vector<std::string>& cols) {
  const auto path = support::temp_dir("ser_" + name) / "model.json";
  io::save_model(path, io::ModelFile{cols, model});
  return std::get<M>(io::load_model(path).model);
}

DhelSpec tiny_dhel() {
  auto s = DhelSpec::defaults();
  s.network.input_features = 3;
  s.network.hidden_layers = {2};
  s.training.epochs = 3;
  s.classifier.params["n_estimators"] = 5;
  s.classifier.params["subsample_features"] = 3;
  s.search.n_candidates = 0;
  return s;
}

}  // namespace

TEST_CASE("every classifier scores identically after a file round trip") {
  const auto t = support::blobs(150, 30, 4, 1.2, 1);
  const std::vector<ClassifierSpec> specs{
      spec_of(ClassifierKind::decision_tree, {{"max_depth", 4}}),
      spec_of(ClassifierKind::random_forest, {{"n_estimators", 5}}),
      spec_of(ClassifierKind::gradient_boosting, {{"n_estimators", 5}}),
      spec_of(ClassifierKind::logistic_regression, {}),
      spec_of(ClassifierKind::linear_svm, {}),
      spec_of(ClassifierKind::underbagging, {{"n_estimators", 3}}, ClassifierKind::logistic_regression),
      spec_of(ClassifierKind::rusboost, {{"n_estimators", 3}, {"max_depth", 2}}, ClassifierKind::decision_tree),
  };
  for (const auto& spec : specs) {
    CAPTURE(to_string(spec.kind));
    const auto model = fit(t, spec);
    const auto back = file_round_trip(std::string(to_string(spec.kind)), model, t.columns());
    CHECK(decision_values(back, t.matrix()) == decision_values(model, t.matrix()));
    CHECK(score(back, t.matrix()) == score(model, t.matrix()));
    CHECK(back.spec().seed == spec.seed);
    CHECK(back.spec().params == spec.params);
    CHECK(back.spec().base_kind == spec.base_kind);
  }
}

TEST_CASE("autoencoder and dhel models round trip") {
  const auto t = support::blobs(200, 20, 3, 1.5, 2);
  const auto normals = t.subset(t.indices_of(0));
  const auto spec = tiny_dhel();
  TrainConfig tc;
  tc.epochs = 3;
  const auto ae = train_autoencoder(normals, spec.network, tc);
  const auto ae2 = file_round_trip("ae", ae, t.columns());
  CHECK(reconstruction_mses(ae2, t.matrix()) == reconstruction_mses(ae, t.matrix()));
  CHECK(ae2.loss_history == ae.loss_history);

  SplitSpec sp;
  const auto parts = stratified_split(t, sp);
  const auto dhel = train_dhel(parts.train, parts.validation, spec);
  const auto dhel2 = file_round_trip("dhel", dhel, t.columns());
  CHECK(dhel_score(dhel2, t.matrix()) == dhel_score(dhel, t.matrix()));
  CHECK(dhel2.provenance.autoencoder_rows == dhel.provenance.autoencoder_rows);
  CHECK(dhel2.selected_feature_names == dhel.selected_feature_names);
  CHECK_NOTHROW(verify_provenance(dhel2, &parts.test));
}

TEST_CASE("model file dispatch and checks") {
  const auto t = support::blobs(60, 20, 2, 1.0, 3);
  const auto model = fit(t, spec_of(ClassifierKind::decision_tree, {}));
  const auto dir = support::temp_dir("ser_file");
  io::save_model(dir / "m.json", io::ModelFile{t.columns(), model});
  const auto f = io::load_model(dir / "m.json");
  CHECK(f.columns == t.columns());
  CHECK(io::model_scores(f, t.matrix()) == score(model, t.matrix()));
  CHECK(io::model_predictions(f, t.matrix()) == predict(model, t.matrix()));
  auto j = io::read_json(dir / "m.json");
  CHECK(j.at("format") == "parcel-model");
  j["version"] = 99;
  io::write_json(dir / "v.json", j);
  CHECK_THROWS_AS(io::load_model(dir / "v.json"), DataError);
  j = io::read_json(dir / "m.json");
  j["type"] = "mystery";
  io::write_json(dir / "t.json", j);
  CHECK_THROWS_AS(io::load_model(dir / "t.json"), DataError);
  j = io::read_json(dir / "m.json");
  j["model"].erase("fitted");
  io::write_json(dir / "p.json", j);
  CHECK_THROWS_AS(io::load_model(dir / "p.json"), DataError);
}

TEST_CASE("spec converters round trip") {
  DbslSpec d;
  d.resample = ResampleSpec{ResampleMethod::near_miss_1, 0.5, 4, 9};
  d.classifier = spec_of(ClassifierKind::underbagging, {{"max_depth", 3}}, ClassifierKind::decision_tree);
  const auto d2 = io::dbsl_spec_from_json(io::to_json(d));
  REQUIRE(d2.resample);
  CHECK(d2.resample->method == ResampleMethod::near_miss_1);
  CHECK(d2.resample->target_ratio == 0.5);
  CHECK(d2.resample->k_neighbors == 4);
  CHECK(d2.classifier.base_kind == ClassifierKind::decision_tree);
  CHECK(d2.classifier.params == d.classifier.params);

  SearchSpec s;
  s.ranges = {{"a", IntRange{2, 5}}, {"b", ChoiceRange{{1, 2}}}, {"c", UniformRange{0.5, 1}}, {"d", LogUniformRange{0.01, 0.3}}};
  s.n_candidates = 7;
  s.objective = Objective::roc_auc;
  const auto s2 = io::search_spec_from_json(io::to_json(s));
  CHECK(s2.n_candidates == 7);
  CHECK(s2.objective == Objective::roc_auc);
  CHECK(sample_candidates(s2) == sample_candidates(s));

  const auto net = io::network_spec_from_json(io::to_json(NetworkSpec::preset_dae()));
  CHECK(net.hidden_layers == NetworkSpec::preset_dae().hidden_layers);
  CHECK(net.noise_sigma == 0.2);
  CHECK(net.variant == AutoencoderVariant::dae);

  const auto dh = io::dhel_spec_from_json(io::to_json(DhelSpec::defaults()));
  CHECK(dh.classifier.params == DhelSpec::defaults().classifier.params);

  auto rules = InsuranceRuleTable::example();
  rules.gated_categories = {"jewellery"};
  const auto r2 = io::insurance_rules_from_json(io::to_json(rules));
  CHECK(r2.gated_categories == rules.gated_categories);
  CHECK(insurance_cost(Cents{60000}, "D", r2) == insurance_cost(Cents{60000}, "D", rules));
  CHECK(r2.uninsured_threshold == rules.uninsured_threshold);

  CHECK_THROWS_AS(io::classifier_spec_from_json(io::Json{{"kind", "knn"}}), InvalidArgument);
}

TEST_CASE("encoded tables keep their metadata beside the CSV") {
  SyntheticConfig cfg;
  cfg.n_rows = 200;
  cfg.positive_rate = 0.05;
  const auto raw = generate_synthetic(cfg);
  const auto t = log_transform(encode_one_hot(raw, 20), numeric_feature_names(raw.schema));
  const auto dir = support::temp_dir("ser_table");
  io::save_table(dir / "t.csv", t);
  CHECK(std::filesystem::exists(io::meta_path(dir / "t.csv")));
  const auto back = io::load_table(dir / "t.csv");
  CHECK(back.log_columns() == t.log_columns());
  REQUIRE(back.one_hot_groups().size() == t.one_hot_groups().size());
  CHECK(back.one_hot_groups()[0].feature == t.one_hot_groups()[0].feature);
  CHECK(back.one_hot_groups()[0].width == t.one_hot_groups()[0].width);
  CHECK(back.matrix() == t.matrix());
}

TEST_CASE("column alignment") {
  const auto t = support::blobs(5, 5, 3, 1.0, 4);
  const auto a = io::align_columns(t, {"x2", "x0"});
  CHECK(a.columns() == std::vector<std::string>{"x2", "x0"});
  CHECK(a.matrix().col(0) == t.matrix().col(2));
  CHECK_THROWS_AS(io::align_columns(t, {"x9"}), DataError);
}
