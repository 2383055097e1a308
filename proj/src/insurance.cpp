#include "parcel/insurance.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "parcel/error.hpp"

namespace parcel {

Cents Cents::from_euros(double euros) {
  if (!std::isfinite(euros)) throw InvalidArgument("currency amount must be finite");
  return {static_cast<std::int64_t>(std::llround(euros * 100.0))};
}

std::string format_cents(Cents c) {
  const auto a = c.value < 0 ? -c.value : c.value;
  return fmt::format("{}{}.{:02}", c.value < 0 ? "-" : "", a / 100, a % 100);
}

void InsuranceRuleTable::validate() const {
  if (uninsured_threshold.value < 0) throw InvalidArgument("uninsured_threshold must be >= 0");
  for (const auto& [partner, tiers] : partners) {
    if (tiers.empty()) throw InvalidArgument(fmt::format("partner '{}' has no tiers", partner));
    for (std::size_t i = 0; i < tiers.size(); ++i) {
      if (tiers[i].premium.value < 0 || tiers[i].insured_value.value < 0)
        throw InvalidArgument(fmt::format("partner '{}' has a negative tier amount", partner));
      if (i > 0 && tiers[i].lower_bound <= tiers[i - 1].lower_bound)
        throw InvalidArgument(fmt::format("partner '{}' tiers must be strictly increasing", partner));
    }
  }
}

const std::vector<InsuranceTier>& InsuranceRuleTable::tiers(const std::string& partner) const {
  auto it = partners.find(partner);
  if (it == partners.end()) throw InvalidArgument(fmt::format("no insurance rules for partner '{}'", partner));
  return it->second;
}

InsuranceRuleTable InsuranceRuleTable::example() {
  InsuranceRuleTable t;
  const std::vector<std::int64_t> bounds{25000, 50000, 100000, 250000};
  const std::vector<std::int64_t> premiums{250, 450, 800, 1500};
  const std::string names = "ABCDEF";
  for (std::size_t p = 0; p < names.size(); ++p) {
    std::vector<InsuranceTier> tiers;
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      const auto upper = i + 1 < bounds.size() ? bounds[i + 1] : 500000;
      tiers.push_back({{bounds[i]}, {upper}, {premiums[i] + static_cast<std::int64_t>(p) * 50}});
    }
    t.partners[std::string(1, names[p])] = std::move(tiers);
  }
  return t;
}

int business_rule_predict(Cents stock_value, const std::set<std::string>& category_flags,
                          const InsuranceRuleTable& rules) {
  if (stock_value < rules.uninsured_threshold) return 0;
  if (rules.gated_categories.empty()) return 1;
  for (const auto& c : category_flags)
    if (rules.gated_categories.count(c)) return 1;
  return 0;
}

Cents insurance_cost(Cents stock_value, const std::string& partner, const InsuranceRuleTable& rules) {
  const auto& tiers = rules.tiers(partner);
  if (stock_value.value < 0) throw InvalidArgument("stock value must be >= 0");
  if (stock_value < rules.uninsured_threshold) return {};
  Cents premium{};
  for (const auto& tier : tiers) {
    if (tier.lower_bound <= stock_value) premium = tier.premium;
    else break;
  }
  return premium;
}

CostReport misclassification_cost(const std::vector<ParcelEconomics>& parcels, const InsuranceRuleTable& rules,
                                  const std::string& scenario) {
  CostReport r;
  r.scenario = scenario;
  for (const auto& p : parcels) {
    if (p.stock_value.value < 0) throw InvalidArgument("stock value must be >= 0");
    Cents mc{};
    if (p.predicted == 1 && p.actual == 1) ++r.counts.tp;
    else if (p.predicted == 0 && p.actual == 0) ++r.counts.tn;
    else if (p.predicted == 1) {
      ++r.counts.fp;
      mc = insurance_cost(p.stock_value, p.partner, rules);
      r.fp_cost += mc;
    } else {
      ++r.counts.fn;
      mc = p.stock_value;
      r.fn_cost += mc;
    }
    r.per_category[p.category] += mc;
  }
  r.total = r.fp_cost + r.fn_cost;
  return r;
}

std::vector<int> business_rule_predict(const std::vector<ParcelEconomics>& parcels, const InsuranceRuleTable& rules) {
  std::vector<int> out;
  out.reserve(parcels.size());
  for (const auto& p : parcels) out.push_back(business_rule_predict(p.stock_value, {p.category}, rules));
  return out;
}

std::vector<CostReport> scenario_costs(const std::vector<ParcelEconomics>& parcels, const InsuranceRuleTable& rules,
                                       const std::map<std::string, std::vector<int>>& model_predictions) {
  auto run = [&](const std::string& name, const std::vector<int>& predicted) {
    if (predicted.size() != parcels.size())
      throw InvalidArgument(
          fmt::format("scenario '{}' has {} predictions for {} parcels", name, predicted.size(), parcels.size()));
    auto copy = parcels;
    for (std::size_t i = 0; i < copy.size(); ++i) copy[i].predicted = predicted[i];
    return misclassification_cost(copy, rules, name);
  };
  std::vector<CostReport> out;
  out.push_back(run("insure_all", std::vector<int>(parcels.size(), 1)));
  out.push_back(run("insure_nothing", std::vector<int>(parcels.size(), 0)));
  out.push_back(run("business_rules", business_rule_predict(parcels, rules)));
  for (const auto& [name, predicted] : model_predictions) out.push_back(run(name, predicted));
  std::stable_sort(out.begin(), out.end(), [](const CostReport& a, const CostReport& b) { return a.total < b.total; });
  return out;
}

namespace {

std::string group_value(const LabeledTable& table, const std::string& feature, std::size_t row) {
  for (const auto& g : table.one_hot_groups()) {
    if (g.feature != feature) continue;
    for (std::size_t k = 0; k < g.width; ++k) {
      const auto col = g.first_column + k;
      if (table.matrix()(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) > 0.5)
        return table.columns()[col].substr(feature.size() + 1);
    }
    return std::string(kOtherCategory);
  }
  throw InvalidArgument(fmt::format("table has no one-hot group for '{}'", feature));
}

}  // namespace

std::vector<ParcelEconomics> parcels_from_table(const LabeledTable& table, const std::string& stock_column,
                                                const std::string& partner_feature,
                                                const std::string& category_feature) {
  const auto sc = table.require_column(stock_column);
  const auto& logged = table.log_columns();
  const bool is_log = std::find(logged.begin(), logged.end(), stock_column) != logged.end();
  bool has_category = false;
  for (const auto& g : table.one_hot_groups()) has_category = has_category || g.feature == category_feature;
  std::vector<ParcelEconomics> out(table.rows());
  for (std::size_t i = 0; i < table.rows(); ++i) {
    double v = table.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(sc));
    if (is_log) v = log1p_inverse(v);
    out[i].stock_value = Cents::from_euros(std::max(v, 0.0));
    out[i].partner = group_value(table, partner_feature, i);
    if (has_category) out[i].category = group_value(table, category_feature, i);
    out[i].actual = table.labels()[i];
  }
  return out;
}

}  // namespace parcel
