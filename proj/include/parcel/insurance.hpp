#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "parcel/eval.hpp"
#include "parcel/tabular.hpp"

namespace parcel {

/// Whole euro cents.
struct Cents {
  std::int64_t value = 0;

  static Cents from_euros(double euros);
  double euros() const { return static_cast<double>(value) / 100.0; }

  friend Cents operator+(Cents a, Cents b) { return {a.value + b.value}; }
  Cents& operator+=(Cents o) {
    value += o.value;
    return *this;
  }
  friend auto operator<=>(Cents, Cents) = default;
};

std::string format_cents(Cents c);  // "1234.56"

struct InsuranceTier {
  Cents lower_bound;  // inclusive
  Cents insured_value;
  Cents premium;
};

struct InsuranceRuleTable {
  std::map<std::string, std::vector<InsuranceTier>> partners;
  Cents uninsured_threshold{25000};
  /// Non-empty: only these product categories are ever insured.
  std::set<std::string> gated_categories;

  void validate() const;
  const std::vector<InsuranceTier>& tiers(const std::string& partner) const;

  /// Example tiers for carriers A to F, premiums growing with partner index.
  static InsuranceRuleTable example();
};

/// 1 when the parcel would be insured under the rules.
int business_rule_predict(Cents stock_value, const std::set<std::string>& category_flags,
                          const InsuranceRuleTable& rules);

Cents insurance_cost(Cents stock_value, const std::string& partner, const InsuranceRuleTable& rules);

struct ParcelEconomics {
  Cents stock_value;
  std::string partner;
  std::string category;
  int predicted = 0;
  int actual = 0;
};

struct CostReport {
  std::string scenario;
  ConfusionMatrix counts;
  Cents fp_cost;
  Cents fn_cost;
  Cents total;
  std::map<std::string, Cents> per_category;
};

CostReport misclassification_cost(const std::vector<ParcelEconomics>& parcels, const InsuranceRuleTable& rules,
                                  const std::string& scenario = "model");

/// Adds insure_all, insure_nothing and business_rules to the model columns; sorted by total.
std::vector<CostReport> scenario_costs(const std::vector<ParcelEconomics>& parcels, const InsuranceRuleTable& rules,
                                       const std::map<std::string, std::vector<int>>& model_predictions);

/// Parcel records for an encoded table. Stock value is undone from log space when
/// the column was log-transformed; partner and category come from one-hot groups.
std::vector<ParcelEconomics> parcels_from_table(const LabeledTable& table,
                                                const std::string& stock_column = "stock_value",
                                                const std::string& partner_feature = "carrier",
                                                const std::string& category_feature = "product_category");

std::vector<int> business_rule_predict(const std::vector<ParcelEconomics>& parcels, const InsuranceRuleTable& rules);

}  // namespace parcel
