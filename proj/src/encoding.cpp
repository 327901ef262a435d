#include "smfm/encoding.hpp"

#include "smfm/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>

namespace smfm {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == delim) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_number(const std::string& s, const std::string& context) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ValidationError(context + ": malformed number '" + s + "'");
  return v;
}

std::vector<std::size_t> column_positions(const std::vector<std::string>& header,
                                          const std::vector<ColumnSpec>& columns) {
  std::vector<std::size_t> pos;
  for (const auto& c : columns) {
    auto it = std::find(header.begin(), header.end(), c.name);
    if (it == header.end()) throw ValidationError("column '" + c.name + "' missing from records header");
    pos.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  return pos;
}

}  // namespace

EncodingSchema::EncodingSchema(std::vector<ColumnSpec> columns, bool reserve_oov)
    : columns_(std::move(columns)), reserve_oov_(reserve_oov) {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (columns_[i].name == columns_[j].name)
        throw ValidationError("schema: duplicate column '" + columns_[i].name + "'");
    const auto& c = columns_[i];
    if (c.kind == ColumnKind::numeric && !(c.max > c.min))
      throw ValidationError("schema: column '" + c.name + "' needs min < max");
  }
  rebuild();
}

void EncodingSchema::rebuild() {
  ranges_.clear();
  vocab_.assign(columns_.size(), {});
  std::size_t next = 0;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const auto& c = columns_[i];
    std::size_t width = 1;
    if (c.kind != ColumnKind::numeric) {
      for (std::size_t k = 0; k < c.vocabulary.size(); ++k) {
        if (!vocab_[i].emplace(c.vocabulary[k], static_cast<FeatureIndex>(next + k)).second)
          throw ValidationError("schema: duplicate vocabulary entry '" + c.vocabulary[k] + "' in column '" +
                                c.name + "'");
      }
      width = c.vocabulary.size() + (reserve_oov_ ? 1 : 0);
    }
    ranges_.push_back({static_cast<FeatureIndex>(next), static_cast<FeatureIndex>(next + width)});
    next += width;
  }
  dim_ = next;
}

EncodingSchema EncodingSchema::parse(std::istream& in, const std::string& base_dir, bool reserve_oov) {
  std::vector<ColumnSpec> columns;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream ss(t);
    std::string name, kind, arg, extra;
    ss >> name >> kind;
    ss >> arg;
    if (ss >> extra) throw ParseError("too many fields in schema line", line_no, 1);
    if (kind.empty()) throw ParseError("expected `name kind [vocab-file|min,max]`", line_no, 1);

    ColumnSpec c;
    c.name = name;
    if (kind == "onehot" || kind == "multihot") {
      c.kind = kind == "onehot" ? ColumnKind::one_hot : ColumnKind::multi_hot;
      if (!arg.empty()) {
        const auto path = (std::filesystem::path(base_dir) / arg).string();
        std::ifstream vf(path);
        if (!vf) throw IoError("cannot open vocabulary file " + path);
        std::string v;
        while (std::getline(vf, v)) {
          v = trim(v);
          if (!v.empty()) c.vocabulary.push_back(v);
        }
      }
    } else if (kind == "numeric") {
      c.kind = ColumnKind::numeric;
      const auto comma = arg.find(',');
      if (comma == std::string::npos) throw ParseError("numeric column needs min,max", line_no, 1);
      const std::string ctx = "schema line " + std::to_string(line_no);
      c.min = parse_number(arg.substr(0, comma), ctx);
      c.max = parse_number(arg.substr(comma + 1), ctx);
    } else {
      throw ParseError("unknown column kind '" + kind + "'", line_no, name.size() + 2);
    }
    columns.push_back(std::move(c));
  }
  return EncodingSchema(std::move(columns), reserve_oov);
}

EncodingSchema EncodingSchema::load(const std::string& path, bool reserve_oov) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema " + path);
  const auto dir = std::filesystem::path(path).parent_path().string();
  return parse(in, dir.empty() ? "." : dir, reserve_oov);
}

void EncodingSchema::fit(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  const auto pos = column_positions(header, columns_);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      auto& col = columns_[c];
      if (col.kind == ColumnKind::numeric || pos[c] >= row.size()) continue;
      auto add = [&](const std::string& v) {
        if (v.empty()) return;
        if (std::find(col.vocabulary.begin(), col.vocabulary.end(), v) == col.vocabulary.end())
          col.vocabulary.push_back(v);
      };
      if (col.kind == ColumnKind::one_hot) {
        add(row[pos[c]]);
      } else {
        for (const auto& v : split(row[pos[c]], kMultiHotSeparator)) add(v);
      }
    }
  }
  rebuild();
}

FeatureRange EncodingSchema::range(const std::string& column) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].name == column) return ranges_[i];
  throw ValidationError("schema has no column '" + column + "'");
}

std::optional<FeatureIndex> EncodingSchema::lookup(std::size_t column, const std::string& value) const {
  auto it = vocab_[column].find(value);
  if (it == vocab_[column].end()) return std::nullopt;
  return it->second;
}

FeatureIndex EncodingSchema::oov_index(std::size_t column) const {
  if (!reserve_oov_) throw ValidationError("schema does not reserve OOV indices");
  return ranges_[column].end - 1;
}

RecordTable RecordTable::read(std::istream& in, char delimiter) {
  RecordTable t;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("records: missing header row");
  t.header = split(line, delimiter);
  const auto label_it = std::find(t.header.begin(), t.header.end(), "label");
  const std::optional<std::size_t> label_col =
      label_it == t.header.end() ? std::nullopt : std::optional<std::size_t>(label_it - t.header.begin());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line, delimiter);
    if (cells.size() != t.header.size())
      throw ParseError("expected " + std::to_string(t.header.size()) + " cells, got " +
                           std::to_string(cells.size()),
                       line_no, 1);
    double y = 1.0;
    if (label_col) {
      y = parse_number(cells[*label_col], "records line " + std::to_string(line_no));
      if (y != 0.0 && y != 1.0) throw ParseError("label must be 0 or 1", line_no, 1);
    }
    t.labels.push_back(y);
    t.rows.push_back(std::move(cells));
  }
  return t;
}

RecordTable RecordTable::read_file(const std::string& path, char delimiter) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open records " + path);
  return read(in, delimiter);
}

Dataset encode_records(const RecordTable& table, const EncodingSchema& schema) {
  const auto& columns = schema.columns();
  const auto pos = column_positions(table.header, columns);
  std::vector<LabeledExample> out;
  out.reserve(table.rows.size());

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::vector<SparseEntry> entries;
    const std::string where = "row " + std::to_string(r + 1);

    auto category = [&](std::size_t c, const std::string& v) -> FeatureIndex {
      if (auto idx = schema.lookup(c, v)) return *idx;
      if (schema.reserve_oov()) return schema.oov_index(c);
      throw ValidationError(where + ": unseen category '" + v + "' in column '" + columns[c].name + "'");
    };

    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& col = columns[c];
      const std::string& cell = row[pos[c]];
      switch (col.kind) {
        case ColumnKind::one_hot:
          if (cell.empty()) throw ValidationError(where + ": empty one-hot cell in column '" + col.name + "'");
          entries.push_back({category(c, cell), 1.0});
          break;
        case ColumnKind::multi_hot: {
          std::vector<FeatureIndex> members;
          for (const auto& v : split(cell, kMultiHotSeparator)) {
            if (v.empty()) continue;
            members.push_back(category(c, v));
          }
          std::sort(members.begin(), members.end());
          members.erase(std::unique(members.begin(), members.end()), members.end());
          for (auto m : members) entries.push_back({m, 1.0});
          break;
        }
        case ColumnKind::numeric: {
          const double raw = parse_number(cell, where + ", column '" + col.name + "'");
          const double scaled = std::clamp((raw - col.min) / (col.max - col.min), 0.0, 1.0);
          entries.push_back({schema.range(col.name).begin, scaled});
          break;
        }
      }
    }
    LabeledExample ex;
    ex.x = SparseVector::from_entries(std::move(entries), schema.dim());
    ex.y = table.labels[r];
    out.push_back(std::move(ex));
  }
  return Dataset(std::move(out), schema.dim());
}

}  // namespace smfm
