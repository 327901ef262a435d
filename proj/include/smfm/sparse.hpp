#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace smfm {

using FeatureIndex = std::uint32_t;

struct SparseEntry {
  FeatureIndex index = 0;
  double value = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// One encoded sample x in R^m. Entries are kept sorted by index, with no
/// duplicates and no stored zeros; every value lies in [-1, 1].
class SparseVector {
public:
  SparseVector() = default;
  explicit SparseVector(std::size_t dim) : dim_(dim) {}

  /// Sorts, drops zeros and validates. Throws ValidationError on duplicate
  /// indices, out-of-range indices, non-finite values or |v| > 1.
  static SparseVector from_entries(std::vector<SparseEntry> entries, std::size_t dim);

  /// Trusted constructor: entries must already satisfy every invariant.
  static SparseVector from_sorted_unchecked(std::vector<SparseEntry> entries, std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::span<const SparseEntry> entries() const noexcept { return entries_; }

  /// Value at `index`, zero when absent. O(log nnz).
  double at(FeatureIndex index) const noexcept;
  bool contains(FeatureIndex index) const noexcept;

  /// Changes the declared dimension. The new dimension must cover every
  /// stored index.
  void set_dim(std::size_t dim);

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

private:
  std::vector<SparseEntry> entries_;
  std::size_t dim_ = 0;
};

enum class Provenance : std::uint8_t { natural, mixed, copied };

std::string_view to_string(Provenance p) noexcept;

struct LabeledExample {
  SparseVector x;
  double y = 0.0;
  Provenance origin = Provenance::natural;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

/// An immutable collection of examples sharing the dimension m. Caches
/// tau = max nonzero count.
class Dataset {
public:
  Dataset() = default;
  explicit Dataset(std::size_t dim) : dim_(dim) {}

  /// Throws ValidationError if any example has a different dimension or a
  /// label outside [0, 1].
  Dataset(std::vector<LabeledExample> examples, std::size_t dim);

  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t tau() const noexcept { return tau_; }
  std::size_t count_positive() const noexcept;

  std::span<const LabeledExample> examples() const noexcept { return examples_; }
  const LabeledExample& operator[](std::size_t i) const { return examples_[i]; }
  auto begin() const noexcept { return examples_.begin(); }
  auto end() const noexcept { return examples_.end(); }

  /// Labels and, separately, the examples as a vector (for rebuilding).
  std::vector<double> labels() const;
  std::vector<LabeledExample> release() && { return std::move(examples_); }

  /// Concatenation; dimensions must agree.
  static Dataset concat(const Dataset& a, const Dataset& b);

  /// Same examples, widened to dimension `dim` (>= current dim).
  Dataset with_dim(std::size_t dim) const;

private:
  std::vector<LabeledExample> examples_;
  std::size_t dim_ = 0;
  std::size_t tau_ = 0;
};

struct ParseOptions {
  /// Clamp values with |v| > 1 to sign(v) instead of rejecting them.
  bool clamp = false;
};

/// Parses `label idx:val idx:val ...` (0-based indices). `dim` is the
/// declared feature count; when absent the vector is sized max index + 1.
/// `line_no` is used only for error messages.
LabeledExample parse_sparse_line(std::string_view line, std::optional<std::size_t> dim = std::nullopt,
                                 const ParseOptions& opts = {}, std::size_t line_no = 0);

/// Inverse of parse_sparse_line. Values are printed with enough digits to
/// round-trip exactly.
std::string format_sparse_line(const LabeledExample& ex);

/// Reads a sparse text stream. Blank lines and lines starting with '#' are
/// skipped, except a `# dim=<m>` header which declares the dimension.
/// Without header or explicit dim, m = max index + 1 over the file.
Dataset read_sparse(std::istream& in, std::optional<std::size_t> dim = std::nullopt,
                    const ParseOptions& opts = {});
Dataset read_sparse_file(const std::string& path, std::optional<std::size_t> dim = std::nullopt,
                         const ParseOptions& opts = {});

/// Writes `# dim=<m>`, any extra comment lines (each prefixed with '#'),
/// then one example per line.
void write_sparse(std::ostream& out, const Dataset& data, std::span<const std::string> comments = {});
void write_sparse_file(const std::string& path, const Dataset& data,
                       std::span<const std::string> comments = {});

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace smfm
