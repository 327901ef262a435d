#pragma once

#include "smfm/sparse.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace smfm {

enum class ColumnKind { one_hot, multi_hot, numeric };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::one_hot;
  std::vector<std::string> vocabulary;  // categorical only; index order
  double min = 0.0;                     // numeric only
  double max = 1.0;
};

/// Half-open range [begin, end) of feature indices.
struct FeatureRange {
  FeatureIndex begin = 0;
  FeatureIndex end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool contains(FeatureIndex i) const noexcept { return i >= begin && i < end; }
  friend bool operator==(const FeatureRange&, const FeatureRange&) = default;
};

/// Maps tabular columns onto disjoint feature-index ranges that together
/// cover [0, m). Categorical columns get one index per vocabulary entry
/// (plus one reserved OOV index when enabled); numeric columns get one.
class EncodingSchema {
public:
  EncodingSchema() = default;
  explicit EncodingSchema(std::vector<ColumnSpec> columns, bool reserve_oov = false);

  /// Schema text: one column per line, `name kind [vocab-file|min,max]`,
  /// where kind is onehot, multihot or numeric. Vocabulary files hold one
  /// value per line and are resolved relative to `base_dir`.
  static EncodingSchema parse(std::istream& in, const std::string& base_dir = ".", bool reserve_oov = false);
  static EncodingSchema load(const std::string& path, bool reserve_oov = false);

  /// Adds every categorical value in `rows` that is missing from the
  /// vocabulary, in order of first appearance.
  void fit(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);

  std::size_t dim() const noexcept { return dim_; }
  bool reserve_oov() const noexcept { return reserve_oov_; }
  const std::vector<ColumnSpec>& columns() const noexcept { return columns_; }
  FeatureRange range(const std::string& column) const;

  /// Feature index of a categorical value; nullopt when unseen.
  std::optional<FeatureIndex> lookup(std::size_t column, const std::string& value) const;
  FeatureIndex oov_index(std::size_t column) const;

private:
  void rebuild();

  std::vector<ColumnSpec> columns_;
  std::vector<FeatureRange> ranges_;
  std::vector<std::unordered_map<std::string, FeatureIndex>> vocab_;
  std::size_t dim_ = 0;
  bool reserve_oov_ = false;
};

/// Delimited text with a header row. A column named `label` holds 0/1
/// labels; without it every row is labelled 1 (positive-only logs).
struct RecordTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<double> labels;

  static RecordTable read(std::istream& in, char delimiter = ',');
  static RecordTable read_file(const std::string& path, char delimiter = ',');
};

/// Multi-hot cells list their members separated by this character.
inline constexpr char kMultiHotSeparator = '|';

/// One SparseVector per row. One-hot columns contribute exactly one entry
/// of value 1, multi-hot columns one per set member, numeric columns their
/// min-max scaled value (clamped to [0,1], zero entries dropped). Unseen
/// categories throw unless the schema reserves OOV indices.
Dataset encode_records(const RecordTable& table, const EncodingSchema& schema);

}  // namespace smfm
