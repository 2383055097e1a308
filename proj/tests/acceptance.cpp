// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "fixtures.hpp"
#include "support.hpp"

#include "parcel/autonet.hpp"
#include "parcel/dhel.hpp"
#include "parcel/error.hpp"
#include "parcel/eval.hpp"
#include "parcel/experiment.hpp"
#include "parcel/explain.hpp"
#include "parcel/insurance.hpp"
#include "parcel/learners.hpp"
#include "parcel/resample.hpp"
#include "parcel/tabular.hpp"

using namespace parcel;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SyntheticConfig separable_preset() {
  SyntheticConfig cfg;
  cfg.n_rows = 50000;
  cfg.positive_rate = 0.0025;
  cfg.signal_strength = 1.0;
  cfg.seed = 7;
  return cfg;
}

// --- 1, 2: metric oracles on published confusion matrices -----------------

Outcome business_rule_metrics() {
  Outcome o;
  const auto r = metrics(ConfusionMatrix{92, 25567, 125, 59706});
  o.require(round3(*r.precision) == 0.004, fmt::format("precision {:.4f}", *r.precision));
  o.require(round3(*r.recall) == 0.424, fmt::format("recall {:.4f}", *r.recall));
  o.require(round3(*r.tnr) == 0.700, fmt::format("tnr {:.4f}", *r.tnr));
  o.require(round3(*r.balanced_accuracy) == 0.562, fmt::format("BA {:.4f}", *r.balanced_accuracy));
  if (o.pass)
    o.detail = fmt::format("precision {:.3f} recall {:.3f} TNR {:.3f} BA {:.3f}", *r.precision, *r.recall, *r.tnr,
                           *r.balanced_accuracy);
  return o;
}

Outcome undersampled_forest_metrics() {
  Outcome o;
  const auto r = metrics(ConfusionMatrix{106, 7476, 111, 77797});
  o.require(round3(*r.recall) == 0.488, fmt::format("recall {:.4f}", *r.recall));
  o.require(round3(*r.tnr) == 0.912, fmt::format("tnr {:.4f}", *r.tnr));
  o.require(round3(*r.precision) == 0.014, fmt::format("precision {:.4f}", *r.precision));
  o.require(round3(*r.balanced_accuracy) == 0.700, fmt::format("BA {:.4f}", *r.balanced_accuracy));
  if (o.pass)
    o.detail = fmt::format("recall {:.3f} TNR {:.3f} precision {:.3f} BA {:.3f}", *r.recall, *r.tnr, *r.precision,
                           *r.balanced_accuracy);
  return o;
}

// --- 3: binary predictors ---------------------------------------------------

Outcome binary_identity() {
  Outcome o;
  Rng rng(derive_seed(3, "acceptance_binary"));
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 2000);
    const double rate = uniform01(rng);
    const double flip = uniform01(rng);
    std::vector<int> y(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = uniform01(rng) < rate ? 1 : 0;
      p[i] = uniform01(rng) < flip ? 1 - y[i] : y[i];
      if (uniform01(rng) < 0.3) p[i] = uniform01(rng) < 0.5 ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    const std::vector<double> s(p.begin(), p.end());
    const auto r = metrics(confusion(y, p), s, y);
    if (*r.roc_auc != *r.balanced_accuracy) ++mismatches;
  }
  o.require(mismatches == 0, fmt::format("{} of 100 configurations differ", mismatches));
  if (o.pass) o.detail = "100/100 configurations with AUC == BA exactly";
  return o;
}

// --- 4: threshold sweep -----------------------------------------------------

Outcome threshold_sweep() {
  Outcome o;
  std::vector<double> errors;
  std::vector<int> labels;
  fixtures::sweep_errors(errors, labels);
  const std::vector<double> grid(fixtures::kSweepGrid.begin(), fixtures::kSweepGrid.end());
  const auto res = threshold_ba_sweep(errors, labels, grid);
  o.require(res.rule.value == 0.0391, fmt::format("selected {}", res.rule.value));

  Rng rng(derive_seed(4, "acceptance_sweep"));
  int violations = 0;
  for (int set = 0; set < 50; ++set) {
    std::vector<double> e;
    std::vector<int> y;
    const double shift = 0.5 * uniform01(rng);
    for (int i = 0; i < 1000; ++i) {
      y.push_back(uniform01(rng) < 0.1 ? 1 : 0);
      e.push_back(std::exp(standard_normal(rng) + (y.back() ? shift : 0.0)) * 0.01);
    }
    y[0] = 1;
    y[1] = 0;
    std::vector<double> g;
    for (int k = 1; k <= 30; ++k) g.push_back(0.002 * k);
    const auto r = threshold_ba_sweep(e, y, g);
    for (std::size_t k = 1; k < r.table.size(); ++k) {
      if (r.table[k].recall > r.table[k - 1].recall) ++violations;
      if (r.table[k].tnr < r.table[k - 1].tnr) ++violations;
      if (r.table[k].roc_auc != r.table[0].roc_auc) ++violations;
    }
  }
  o.require(violations == 0, fmt::format("{} monotonicity/AUC violations", violations));
  if (o.pass)
    o.detail = fmt::format("selected 0.0391 (BA {:.4f}); 50 synthetic sweeps monotone with constant AUC",
                           res.table[4].balanced_accuracy);
  return o;
}

// --- 5: learnability --------------------------------------------------------

struct PipelineCase {
  std::string label;
  ExperimentManifest manifest;
};

std::vector<PipelineCase> learnability_cases(const std::filesystem::path& root) {
  std::vector<PipelineCase> out;
  auto base = [&](const std::string& name) {
    ExperimentManifest m;
    m.data.synthetic = separable_preset();
    m.seed = 7;
    m.output_dir = root / name;
    return m;
  };
  const std::vector<std::pair<ResampleMethod, ClassifierKind>> plain = [] {
    std::vector<std::pair<ResampleMethod, ClassifierKind>> v;
    for (auto r : {ResampleMethod::random_undersample, ResampleMethod::near_miss_1})
      for (auto k : {ClassifierKind::decision_tree, ClassifierKind::random_forest, ClassifierKind::gradient_boosting,
                     ClassifierKind::logistic_regression, ClassifierKind::linear_svm})
        v.emplace_back(r, k);
    return v;
  }();
  for (const auto& [method, kind] : plain) {
    auto m = base(fmt::format("{}_{}", to_string(method), to_string(kind)));
    m.dbsl.resample = ResampleSpec{};
    m.dbsl.resample->method = method;
    m.dbsl.classifier.kind = kind;
    out.push_back({pipeline_label(m), m});
  }
  for (auto wrapper : {ClassifierKind::underbagging, ClassifierKind::rusboost})
    for (auto kind : {ClassifierKind::decision_tree, ClassifierKind::random_forest}) {
      auto m = base(fmt::format("{}_{}", to_string(wrapper), to_string(kind)));
      m.dbsl.classifier.kind = wrapper;
      m.dbsl.classifier.base_kind = kind;
      out.push_back({pipeline_label(m), m});
    }
  auto dhel = base("dhel");
  dhel.pipeline = PipelineKind::dhel;
  out.push_back({pipeline_label(dhel), dhel});
  return out;
}

Outcome learnability() {
  Outcome o;
  const auto root = support::temp_dir("acceptance_learn");
  std::string summary;
  double worst = 1.0;
  for (auto& c : learnability_cases(root)) {
    const auto rec = run_experiment(c.manifest);
    double model_ba = 0.0, rule_ba = 1.0;
    for (const auto& mm : rec.metrics) {
      if (mm.model == "business_rules") rule_ba = mm.report.balanced_accuracy.value_or(1.0);
      else model_ba = mm.report.balanced_accuracy.value_or(0.0);
    }
    worst = std::min(worst, model_ba);
    o.require(model_ba >= 0.80, fmt::format("{} BA {:.3f} < 0.80", c.label, model_ba));
    o.require(model_ba > rule_ba, fmt::format("{} BA {:.3f} <= business rules {:.3f}", c.label, model_ba, rule_ba));
    summary += fmt::format("{} {:.3f} ", c.label, model_ba);
    std::fprintf(stderr, "  %-12s BA %.3f (business rules %.3f)\n", c.label.c_str(), model_ba, rule_ba);
  }
  if (o.pass) o.detail = fmt::format("15 pipelines, min BA {:.3f}, all above business rules", worst);
  return o;
}

// --- 6: leakage -------------------------------------------------------------

Outcome leakage() {
  Outcome o;
  SyntheticConfig cfg = separable_preset();
  cfg.n_rows = 20000;
  cfg.positive_rate = 0.01;
  const auto raw = generate_synthetic(cfg);
  const auto table = log_transform(encode_one_hot(raw, 20), numeric_feature_names(raw.schema));
  std::size_t checked = 0;
  for (auto variant : {AutoencoderVariant::ae, AutoencoderVariant::vae, AutoencoderVariant::dae}) {
    SplitSpec sp;
    sp.seed = 11 + static_cast<std::uint64_t>(variant);
    const auto parts = stratified_split(table, sp);
    auto spec = DhelSpec::defaults();
    spec.network = NetworkSpec::preset(variant);
    spec.classifier.params["subsample_features"] = static_cast<double>(spec.network.input_features);
    spec.classifier.params["n_estimators"] = 30;
    spec.training.epochs = 5;
    spec.search.n_candidates = 0;
    const auto model = train_dhel(parts.train, parts.validation, spec);
    verify_provenance(model, &parts.test);
    o.require(model.provenance.autoencoder_rows_all_normal, "autoencoder saw a positive row");
    o.require(model.provenance.autoencoder_rows.size() == parts.train.negatives(), "autoencoder row count");
    o.require(model.provenance.classifier_rows.size() == parts.validation.rows(), "classifier row count");
    ++checked;

    // mutation: validation rows overlapping train must be rejected
    std::vector<std::size_t> leak(parts.validation.rows());
    std::iota(leak.begin(), leak.end(), std::size_t{0});
    Matrix m(parts.validation.matrix().rows() + 5, parts.validation.matrix().cols());
    m << parts.validation.matrix(), parts.train.matrix().topRows(5);
    auto labels = parts.validation.labels();
    auto ids = parts.validation.row_ids();
    for (std::size_t i = 0; i < 5; ++i) {
      labels.push_back(parts.train.labels()[i]);
      ids.push_back(parts.train.row_ids()[i]);
    }
    const LabeledTable overlapping(parts.validation.columns(), m, labels, ids);
    bool rejected = false;
    try {
      train_dhel(parts.train, overlapping, spec);
    } catch (const DataError&) {
      rejected = true;
    }
    o.require(rejected, fmt::format("{} overlap not rejected", to_string(variant)));
    bool test_rejected = false;
    try {
      verify_provenance(model, &parts.validation);
    } catch (const DataError&) {
      test_rejected = true;
    }
    o.require(test_rejected, "evaluation on classifier rows not rejected");
  }
  // the full pipeline verifies provenance before evaluating
  ExperimentManifest m;
  m.data.synthetic = cfg;
  m.seed = 6;
  m.pipeline = PipelineKind::dhel;
  m.dhel.search.n_candidates = 0;
  m.dhel.training.epochs = 5;
  m.output_dir = support::temp_dir("acceptance_leak");
  const auto rec = run_experiment(m);
  o.require(!rec.metrics.empty(), "pipeline run produced no metrics");
  if (o.pass)
    o.detail = fmt::format("{} variants verified, overlap mutations rejected, pipeline run verified", checked);
  return o;
}

// --- 7: gradients -----------------------------------------------------------

double relative(double a, double b) { return std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b)); }

Outcome gradients() {
  Outcome o;
  Rng rng(derive_seed(7, "acceptance_gradients"));
  double worst_linear = 0.0, worst_net = 0.0;
  for (bool hinge : {false, true}) {
    LinearObjective obj;
    obj.features = support::random_matrix(40, 4, 70 + hinge);
    obj.features.array() -= 0.5;
    obj.hinge = hinge;
    obj.l2_penalty = 0.01;
    for (int i = 0; i < 40; ++i) {
      obj.targets.push_back(i % 4 == 0 ? 1.0 : 0.0);
      obj.weights.push_back(1.0 / 40.0);
    }
    int points = 0;
    while (points < 10) {
      Vector w(4);
      for (int j = 0; j < 4; ++j) w(j) = 2.0 * uniform01(rng) - 1.0;
      const double b = uniform01(rng) - 0.5;
      if (hinge) {
        const Vector m = (obj.features * w).array() + b;
        bool near_kink = false;
        for (int i = 0; i < 40; ++i)
          near_kink = near_kink || std::abs((2.0 * obj.targets[static_cast<std::size_t>(i)] - 1.0) * m(i) - 1.0) < 1e-3;
        if (near_kink) continue;
      }
      Vector gw(4);
      double gb = 0;
      obj.gradient(w, b, gw, gb);
      const double h = 1e-6;
      for (int j = 0; j < 4; ++j) {
        Vector wp = w, wm = w;
        wp(j) += h;
        wm(j) -= h;
        worst_linear = std::max(worst_linear, relative(gw(j), (obj.loss(wp, b) - obj.loss(wm, b)) / (2 * h)));
      }
      worst_linear = std::max(worst_linear, relative(gb, (obj.loss(w, b + h) - obj.loss(w, b - h)) / (2 * h)));
      ++points;
    }
  }
  for (auto variant : {AutoencoderVariant::ae, AutoencoderVariant::vae, AutoencoderVariant::dae}) {
    NetworkSpec spec;
    spec.variant = variant;
    spec.input_features = 3;
    spec.hidden_layers = variant == AutoencoderVariant::vae ? std::vector<std::size_t>{4, 2, 4} : std::vector<std::size_t>{2};
    spec.latent_dim = variant == AutoencoderVariant::vae ? 2 : 0;
    spec.boundary_activation = Activation::sigmoid;
    spec.hidden_activation = Activation::elu;
    spec.dropout_rate = 0.2;
    spec.noise_sigma = variant == AutoencoderVariant::dae ? 0.1 : 0.0;
    const Network net(spec);
    const auto x = support::random_matrix(6, 3, 80 + static_cast<std::uint64_t>(variant));
    Matrix input = x;
    if (variant == AutoencoderVariant::dae) input.array() += 0.05;
    for (int point = 0; point < 10; ++point) {
      std::vector<double> p(net.parameter_count());
      for (auto& v : p) v = 2.0 * uniform01(rng) - 1.0;
      const auto draws = net.draw(6, spec.dropout_rate, derive_seed(7, "acceptance_draw", static_cast<std::uint64_t>(point)));
      std::vector<double> grad;
      net.loss(p, input, x, draws, &grad);
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double h = 1e-6, keep = p[k];
        p[k] = keep + h;
        const double up = net.loss(p, input, x, draws);
        p[k] = keep - h;
        const double down = net.loss(p, input, x, draws);
        p[k] = keep;
        const double fd = (up - down) / (2 * h);
        if (std::abs(fd) + std::abs(grad[k]) > 1e-7) worst_net = std::max(worst_net, relative(grad[k], fd));
      }
    }
  }
  o.require(worst_linear <= 1e-4, fmt::format("linear relative error {:.2e}", worst_linear));
  o.require(worst_net <= 1e-3, fmt::format("network relative error {:.2e}", worst_net));
  if (o.pass)
    o.detail = fmt::format("LR/SVM worst rel. error {:.1e}, AE/VAE/DAE worst {:.1e} over 10 points each", worst_linear,
                           worst_net);
  return o;
}

// --- 8: Shapley -------------------------------------------------------------

Outcome shapley() {
  Outcome o;
  const auto t = support::blobs(400, 100, 6, 0.8, 88);
  ClassifierSpec s;
  s.kind = ClassifierKind::random_forest;
  s.params = {{"n_estimators", 30}, {"max_depth", 6}};
  s.seed = 8;
  const auto model = fit(t, s);
  const auto scorer = make_scorer(model);
  const Matrix bg = background_sample(t, 50, 8);
  const auto rows = support::random_matrix(5, 6, 89);
  double worst = 0.0, worst_eff = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const auto exact = shapley_exact(scorer, bg, row_span(rows, i));
    const auto est = shapley_sample(scorer, bg, row_span(rows, i), 2000, derive_seed(8, "acceptance_row", static_cast<std::uint64_t>(i)));
    for (std::size_t j = 0; j < 6; ++j) worst = std::max(worst, std::abs(exact.values[j] - est.values[j]));
    for (const auto* r : {&exact, &est}) {
      const double sum = std::accumulate(r->values.begin(), r->values.end(), r->base_value);
      worst_eff = std::max(worst_eff, std::abs(sum - r->explained_score));
    }
  }
  o.require(worst <= 0.02, fmt::format("max |sampled - exact| {:.4f}", worst));
  o.require(worst_eff <= 1e-9, fmt::format("efficiency gap {:.2e}", worst_eff));
  if (o.pass) o.detail = fmt::format("max |sampled - exact| {:.4f}, efficiency gap {:.1e}", worst, worst_eff);
  return o;
}

// --- 9: cost model ----------------------------------------------------------

Outcome costs() {
  Outcome o;
  const auto rules = InsuranceRuleTable::example();
  Rng rng(derive_seed(9, "acceptance_costs"));
  std::vector<ParcelEconomics> parcels;
  std::int64_t lost = 0, premiums = 0;
  const std::string partners = "ABCDEF";
  for (int i = 0; i < 5000; ++i) {
    ParcelEconomics p;
    p.stock_value = Cents{static_cast<std::int64_t>(uniform_index(rng, 400000))};
    p.partner = std::string(1, partners[uniform_index(rng, partners.size())]);
    p.category = "c";
    p.actual = uniform01(rng) < 0.05 ? 1 : 0;
    if (p.actual) lost += p.stock_value.value;
    else premiums += insurance_cost(p.stock_value, p.partner, rules).value;
    parcels.push_back(p);
  }
  for (const auto& r : scenario_costs(parcels, rules, {})) {
    if (r.scenario == "insure_nothing") o.require(r.total.value == lost, "insure_nothing total");
    if (r.scenario == "insure_all") o.require(r.total.value == premiums, "insure_all total");
  }
  // FP 300.00 @A -> 2.50, FN 500.00 @B -> 500.00, TP -> 0, FP 1200.00 @C -> 9.00
  const std::vector<ParcelEconomics> four{{Cents{30000}, "A", "c", 1, 0},
                                          {Cents{50000}, "B", "c", 0, 1},
                                          {Cents{120000}, "C", "c", 1, 1},
                                          {Cents{120000}, "C", "c", 1, 0}};
  const auto hand = misclassification_cost(four, rules);
  o.require(hand.total.value == 250 + 50000 + 0 + 900, fmt::format("hand sum {}", hand.total.value));
  if (o.pass) o.detail = fmt::format("5000-parcel scenario totals exact; 4-parcel hand sum {} cents", hand.total.value);
  return o;
}

// --- 10: determinism --------------------------------------------------------

Outcome determinism() {
  Outcome o;
  ExperimentManifest m;
  SyntheticConfig cfg = separable_preset();
  cfg.n_rows = 20000;
  cfg.positive_rate = 0.01;
  m.data.synthetic = cfg;
  m.seed = 10;
  m.dbsl.resample = ResampleSpec{};
  m.dbsl.resample->method = ResampleMethod::near_miss_1;
  m.dbsl.classifier.kind = ClassifierKind::random_forest;
  m.dbsl.classifier.params = {{"n_estimators", 20}};
  m.search.n_candidates = 3;
  m.search.folds = 3;
  m.search.repeats = 1;
  m.output_dir = support::temp_dir("acceptance_det_a");
  run_experiment(m);
  auto m2 = m;
  m2.output_dir = support::temp_dir("acceptance_det_b");
  run_experiment(m2);
  o.require(slurp(m.output_dir / "metrics.csv") == slurp(m2.output_dir / "metrics.csv"), "metrics.csv differs");
  o.require(slurp(m.output_dir / "search_trace.csv") == slurp(m2.output_dir / "search_trace.csv"),
            "search_trace.csv differs");
  o.require(slurp(m.output_dir / "cost_report.csv") == slurp(m2.output_dir / "cost_report.csv"),
            "cost_report.csv differs");

  const auto raw = generate_synthetic(cfg);
  const auto table = encode_one_hot(raw, 20);
  SplitSpec sp;
  sp.seed = 3;
  const auto s1 = stratified_split_indices(table, sp), s2 = stratified_split_indices(table, sp);
  o.require(s1.train == s2.train && s1.validation == s2.validation && s1.test == s2.test, "split stream");
  ResampleSpec rs;
  rs.seed = 4;
  o.require(random_undersample_indices(table, rs) == random_undersample_indices(table, rs), "undersample stream");
  SearchSpec ss;
  ss.ranges = default_search_ranges(ClassifierKind::random_forest);
  ss.seed = 5;
  o.require(sample_candidates(ss) == sample_candidates(ss), "candidate stream");
  if (o.pass) o.detail = "metrics, search trace and cost CSVs byte-identical; split/resample/search streams reproducible";
  return o;
}

// --- 11: preprocessing ------------------------------------------------------

Outcome preprocessing() {
  Outcome o;
  SyntheticConfig cfg;
  cfg.n_rows = 10000;
  cfg.positive_rate = 0.01;
  cfg.seed = 11;
  const auto raw = generate_synthetic(cfg);
  const auto enc = encode_one_hot(raw, 20);
  std::size_t bad_rows = 0;
  for (Eigen::Index i = 0; i < enc.matrix().rows(); ++i)
    for (const auto& g : enc.one_hot_groups()) {
      double s = 0;
      for (std::size_t k = 0; k < g.width; ++k) s += enc.matrix()(i, static_cast<Eigen::Index>(g.first_column + k));
      if (s != 1.0) ++bad_rows;
    }
  o.require(bad_rows == 0, fmt::format("{} group sums differ from 1", bad_rows));

  SplitSpec sp;
  sp.seed = 12;
  const auto parts = stratified_split(enc, sp);
  const double pos = static_cast<double>(enc.positives());
  o.require(std::abs(static_cast<double>(parts.train.positives()) - 0.8 * pos) <= 1.0, "train positives");
  o.require(std::abs(static_cast<double>(parts.validation.positives()) - 0.1 * pos) <= 1.0, "validation positives");
  o.require(std::abs(static_cast<double>(parts.test.positives()) - 0.1 * pos) <= 1.0, "test positives");

  const auto cols = numeric_feature_names(raw.schema);
  const auto back = inverse_log_transform(log_transform(enc, cols));
  const double err = (back.matrix() - enc.matrix()).cwiseAbs().maxCoeff();
  o.require(err <= 1e-12 * std::max(1.0, enc.matrix().cwiseAbs().maxCoeff()) || err <= 1e-12,
            fmt::format("log round trip error {:.2e}", err));
  // relative check per cell, for large stock values
  double worst_rel = 0.0;
  for (Eigen::Index i = 0; i < enc.matrix().size(); ++i) {
    const double a = enc.matrix().data()[i], b = back.matrix().data()[i];
    worst_rel = std::max(worst_rel, std::abs(a - b) / std::max(1.0, std::abs(a)));
  }
  o.require(worst_rel <= 1e-12, fmt::format("log round trip relative error {:.2e}", worst_rel));
  if (o.pass)
    o.detail = fmt::format("{} rows x {} groups sum to 1; split positives {}/{}/{} of {}; round trip rel. error {:.1e}",
                           enc.rows(), enc.one_hot_groups().size(), parts.train.positives(),
                           parts.validation.positives(), parts.test.positives(), enc.positives(), worst_rel);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));
  struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "business-rule metric oracle", 1, business_rule_metrics},
      {2, "undersampled forest metric oracle", 1, undersampled_forest_metrics},
      {3, "binary predictor AUC equals BA", 5, binary_identity},
      {4, "threshold sweep selection", 10, threshold_sweep},
      {5, "learnability benchmark", 600, learnability},
      {6, "leakage contract", 60, leakage},
      {7, "gradient checks", 120, gradients},
      {8, "Shapley oracle equivalence", 180, shapley},
      {9, "cost model properties", 1, costs},
      {10, "determinism", 120, determinism},
      {11, "preprocessing invariants", 30, preprocessing},
  };
  int failed = 0;
  std::size_t ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = fmt::format("exception: {}", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_seconds) o.require(false, fmt::format("took {:.1f}s, budget {:.0f}s", secs, c.budget_seconds));
    if (!o.pass) ++failed;
    std::printf("criterion %2d %s: %s (%s) [%.2fs]\n", c.id, o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", ran - static_cast<std::size_t>(failed), ran);
  return failed == 0 ? 0 : 1;
}
