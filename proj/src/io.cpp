#include "parcel/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "parcel/error.hpp"

namespace parcel::io {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  out.push_back(std::move(cell));
  return out;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  return out;
}

}  // namespace

std::string format_double(double v) { return fmt::format("{}", v); }

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty())
    throw DataError(fmt::format("'{}' is not a number", text));
  return v;
}

std::size_t CsvDocument::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw DataError(fmt::format("CSV has no column '{}'", name));
}

CsvDocument read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
  CsvDocument doc;
  std::string line;
  if (!std::getline(in, line)) throw DataError(fmt::format("'{}' is empty", path.string()));
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  doc.header = split_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split_line(line);
    if (cells.size() != doc.header.size())
      throw DataError(fmt::format("{}:{}: expected {} cells, found {}", path.string(), lineno, doc.header.size(),
                                  cells.size()));
    doc.rows.push_back(std::move(cells));
  }
  return doc;
}

void write_csv(const std::filesystem::path& path, const CsvDocument& doc) {
  auto out = open_out(path);
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << quote_if_needed(cells[i]);
    out << '\n';
  };
  emit(doc.header);
  for (const auto& r : doc.rows) emit(r);
}

RawTable read_raw_csv(const std::filesystem::path& path, const FeatureSchema& schema) {
  schema.validate();
  const auto doc = read_csv(path);
  std::vector<std::size_t> cols;
  for (const auto& f : schema.features) cols.push_back(doc.column(f.name));
  const auto target = doc.column(schema.target_name);
  RawTable raw;
  raw.schema = schema;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto& cells = doc.rows[r];
    std::vector<Cell> row;
    for (std::size_t k = 0; k < schema.features.size(); ++k) {
      const auto& text = cells[cols[k]];
      if (text.empty())
        throw DataError(fmt::format("row {} column '{}' is missing; missing cells are rejected", r + 1,
                                    schema.features[k].name));
      if (schema.features[k].kind == FeatureKind::categorical)
        row.emplace_back(text);
      else
        row.emplace_back(parse_double(text));
    }
    raw.rows.push_back(std::move(row));
    const double y = parse_double(cells[target]);
    if (y != 0.0 && y != 1.0) throw DataError(fmt::format("row {} target is not 0/1", r + 1));
    raw.labels.push_back(static_cast<int>(y));
  }
  raw.validate();
  return raw;
}

void write_raw_csv(const std::filesystem::path& path, const RawTable& raw) {
  CsvDocument doc;
  for (const auto& f : raw.schema.features) doc.header.push_back(f.name);
  doc.header.push_back(raw.schema.target_name);
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    std::vector<std::string> cells;
    for (const auto& c : raw.rows[r]) {
      if (const auto* s = std::get_if<std::string>(&c))
        cells.push_back(*s);
      else
        cells.push_back(format_double(std::get<double>(c)));
    }
    cells.push_back(std::to_string(raw.labels[r]));
    doc.rows.push_back(std::move(cells));
  }
  write_csv(path, doc);
}

LabeledTable read_table_csv(const std::filesystem::path& path, const std::string& target_name) {
  const auto doc = read_csv(path);
  const auto target = doc.column(target_name);
  std::optional<std::size_t> id_col;
  std::vector<std::size_t> feature_cols;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < doc.header.size(); ++c) {
    if (c == target) continue;
    if (doc.header[c] == kRowIdColumn) {
      id_col = c;
      continue;
    }
    feature_cols.push_back(c);
    names.push_back(doc.header[c]);
  }
  Matrix x(static_cast<Eigen::Index>(doc.rows.size()), static_cast<Eigen::Index>(feature_cols.size()));
  std::vector<int> y;
  std::vector<std::uint64_t> ids;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto& cells = doc.rows[r];
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      const auto& text = cells[feature_cols[k]];
      if (text.empty()) throw DataError(fmt::format("row {} column '{}' is missing", r + 1, names[k]));
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = parse_double(text);
    }
    const double label = parse_double(cells[target]);
    if (label != 0.0 && label != 1.0) throw DataError(fmt::format("row {} target is not 0/1", r + 1));
    y.push_back(static_cast<int>(label));
    if (id_col) ids.push_back(static_cast<std::uint64_t>(parse_double(cells[*id_col])));
  }
  return LabeledTable(std::move(names), std::move(x), std::move(y), std::move(ids));
}

void write_table_csv(const std::filesystem::path& path, const LabeledTable& table, const std::string& target_name) {
  auto out = open_out(path);
  out << kRowIdColumn;
  for (const auto& c : table.columns()) out << ',' << quote_if_needed(c);
  out << ',' << target_name << '\n';
  const auto& x = table.matrix();
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out << table.row_ids()[r];
    for (Eigen::Index c = 0; c < x.cols(); ++c) out << ',' << format_double(x(static_cast<Eigen::Index>(r), c));
    out << ',' << table.labels()[r] << '\n';
  }
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_json(const std::filesystem::path& path, const Json& value) {
  auto out = open_out(path);
  out << value.dump(2) << '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

Json to_json(const FeatureSchema& schema) {
  Json features = Json::array();
  for (const auto& f : schema.features) {
    Json jf{{"name", f.name}, {"kind", std::string(to_string(f.kind))}};
    if (f.kind == FeatureKind::categorical) jf["categories"] = f.categories;
    features.push_back(std::move(jf));
  }
  return {{"features", features}, {"target", schema.target_name}};
}

FeatureSchema schema_from_json(const Json& j) {
  FeatureSchema schema;
  schema.target_name = j.value("target", std::string("is_lost_item"));
  for (const auto& jf : j.at("features")) {
    FeatureDef def;
    def.name = jf.at("name").get<std::string>();
    def.kind = feature_kind_from_string(jf.at("kind").get<std::string>());
    if (jf.contains("categories")) def.categories = jf.at("categories").get<std::vector<std::string>>();
    schema.features.push_back(std::move(def));
  }
  schema.validate();
  return schema;
}

Json to_json(const SyntheticConfig& c) {
  return {{"n_rows", c.n_rows},       {"positive_rate", c.positive_rate}, {"n_numeric", c.n_numeric},
          {"n_boolean", c.n_boolean}, {"n_categorical", c.n_categorical}, {"signal_strength", c.signal_strength},
          {"seed", c.seed}};
}

SyntheticConfig synthetic_config_from_json(const Json& j) {
  SyntheticConfig c;
  c.n_rows = j.value("n_rows", c.n_rows);
  c.positive_rate = j.value("positive_rate", c.positive_rate);
  c.n_numeric = j.value("n_numeric", c.n_numeric);
  c.n_boolean = j.value("n_boolean", c.n_boolean);
  c.n_categorical = j.value("n_categorical", c.n_categorical);
  c.signal_strength = j.value("signal_strength", c.signal_strength);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

Json to_json(const SplitSpec& s) {
  return {{"train", s.train_fraction}, {"validation", s.validation_fraction}, {"test", s.test_fraction},
          {"seed", s.seed}};
}

SplitSpec split_spec_from_json(const Json& j) {
  SplitSpec s;
  s.train_fraction = j.value("train", s.train_fraction);
  s.validation_fraction = j.value("validation", s.validation_fraction);
  s.test_fraction = j.value("test", s.test_fraction);
  s.seed = j.value("seed", s.seed);
  s.validate();
  return s;
}

}  // namespace parcel::io
