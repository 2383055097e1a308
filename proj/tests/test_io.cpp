#include <fstream>

#include "doctest.h"
#include "support.hpp"

#include "parcel/error.hpp"
#include "parcel/io.hpp"

using namespace parcel;

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5e17, 0.0}) CHECK(io::parse_double(io::format_double(v)) == v);
  CHECK_THROWS_AS(io::parse_double("1.5x"), DataError);
  CHECK_THROWS_AS(io::parse_double(""), DataError);
}

TEST_CASE("raw CSV round trip keeps cells and labels") {
  SyntheticConfig cfg;
  cfg.n_rows = 500;
  cfg.positive_rate = 0.05;
  cfg.seed = 1;
  const auto raw = generate_synthetic(cfg);
  const auto dir = support::temp_dir("io_raw");
  io::write_raw_csv(dir / "raw.csv", raw);
  const auto back = io::read_raw_csv(dir / "raw.csv", raw.schema);
  CHECK(back.rows == raw.rows);
  CHECK(back.labels == raw.labels);
}

TEST_CASE("encoded CSV round trip keeps values, labels and row ids") {
  const auto t = support::blobs(30, 5, 3, 1.0, 2);
  const std::vector<std::size_t> pick{4, 31, 9, 0};
  const auto sub = t.subset(pick);
  const auto dir = support::temp_dir("io_table");
  io::write_table_csv(dir / "t.csv", sub);
  const auto back = io::read_table_csv(dir / "t.csv");
  CHECK(back.columns() == sub.columns());
  CHECK(back.labels() == sub.labels());
  CHECK(back.row_ids() == sub.row_ids());
  CHECK(back.matrix() == sub.matrix());
}

TEST_CASE("missing cells are rejected, not imputed") {
  const auto dir = support::temp_dir("io_missing");
  {
    std::ofstream out(dir / "m.csv");
    out << "a,b,is_lost_item\n1,2,0\n3,,1\n";
  }
  CHECK_THROWS_AS(io::read_table_csv(dir / "m.csv"), DataError);
  FeatureSchema schema;
  schema.features = {{"a", FeatureKind::numeric, {}}, {"b", FeatureKind::numeric, {}}};
  CHECK_THROWS_AS(io::read_raw_csv(dir / "m.csv", schema), DataError);
}

TEST_CASE("quoted cells survive a CSV round trip") {
  const auto dir = support::temp_dir("io_quote");
  io::CsvDocument doc;
  doc.header = {"name", "note"};
  doc.rows = {{"a,b", "say \"hi\""}, {"plain", ""}};
  io::write_csv(dir / "q.csv", doc);
  const auto back = io::read_csv(dir / "q.csv");
  CHECK(back.header == doc.header);
  CHECK(back.rows == doc.rows);
}

TEST_CASE("unreadable files raise IoError") {
  CHECK_THROWS_AS(io::read_csv("/nonexistent/dir/file.csv"), IoError);
  CHECK_THROWS_AS(io::read_json("/nonexistent/dir/file.json"), IoError);
}

TEST_CASE("config JSON converters round trip") {
  SyntheticConfig cfg;
  cfg.n_rows = 1234;
  cfg.signal_strength = 0.5;
  cfg.seed = 99;
  const auto c2 = io::synthetic_config_from_json(io::to_json(cfg));
  CHECK(c2.n_rows == 1234);
  CHECK(c2.signal_strength == 0.5);
  CHECK(c2.seed == 99);
  SplitSpec s;
  s.train_fraction = 0.7;
  s.validation_fraction = 0.2;
  s.seed = 5;
  const auto s2 = io::split_spec_from_json(io::to_json(s));
  CHECK(s2.train_fraction == 0.7);
  CHECK(s2.seed == 5);
  const auto schema = generate_synthetic(cfg).schema;
  const auto schema2 = io::schema_from_json(io::to_json(schema));
  REQUIRE(schema2.features.size() == schema.features.size());
  CHECK(schema2.features[0].name == schema.features[0].name);
  CHECK(schema2.target_name == "is_lost_item");
}

TEST_CASE("malformed JSON is a data error") {
  const auto dir = support::temp_dir("io_json");
  {
    std::ofstream out(dir / "bad.json");
    out << "{ not json";
  }
  CHECK_THROWS_AS(io::read_json(dir / "bad.json"), DataError);
}
