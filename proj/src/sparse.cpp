#include "smfm/sparse.hpp"

#include "smfm/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace smfm {

namespace {

void validate_value(double v, FeatureIndex index) {
  if (!std::isfinite(v))
    throw ValidationError("feature " + std::to_string(index) + ": non-finite value");
  if (std::fabs(v) > 1.0)
    throw ValidationError("feature " + std::to_string(index) + ": |value| > 1 (" + format_double(v) +
                          "); use clamping to accept it");
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

SparseVector SparseVector::from_entries(std::vector<SparseEntry> entries, std::size_t dim) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].index == entries[i - 1].index)
      throw ValidationError("duplicate feature index " + std::to_string(entries[i].index));
  }
  std::erase_if(entries, [](const SparseEntry& e) { return e.value == 0.0; });
  for (const auto& e : entries) {
    if (e.index >= dim)
      throw ValidationError("feature index " + std::to_string(e.index) + " out of range for dim " +
                            std::to_string(dim));
    validate_value(e.value, e.index);
  }
  return from_sorted_unchecked(std::move(entries), dim);
}

SparseVector SparseVector::from_sorted_unchecked(std::vector<SparseEntry> entries, std::size_t dim) {
  SparseVector out(dim);
  out.entries_ = std::move(entries);
  return out;
}

double SparseVector::at(FeatureIndex index) const noexcept {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                             [](const SparseEntry& e, FeatureIndex i) { return e.index < i; });
  return (it != entries_.end() && it->index == index) ? it->value : 0.0;
}

bool SparseVector::contains(FeatureIndex index) const noexcept {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                             [](const SparseEntry& e, FeatureIndex i) { return e.index < i; });
  return it != entries_.end() && it->index == index;
}

void SparseVector::set_dim(std::size_t dim) {
  if (!entries_.empty() && entries_.back().index >= dim)
    throw ValidationError("cannot shrink dimension below stored index " +
                          std::to_string(entries_.back().index));
  dim_ = dim;
}

std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::natural: return "natural";
    case Provenance::mixed: return "mixed";
    case Provenance::copied: return "copied";
  }
  return "unknown";
}

Dataset::Dataset(std::vector<LabeledExample> examples, std::size_t dim)
    : examples_(std::move(examples)), dim_(dim) {
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const auto& ex = examples_[i];
    if (ex.x.dim() != dim_)
      throw ValidationError("example " + std::to_string(i) + " has dim " + std::to_string(ex.x.dim()) +
                            ", dataset dim is " + std::to_string(dim_));
    if (!(ex.y >= 0.0 && ex.y <= 1.0))
      throw ValidationError("example " + std::to_string(i) + " label outside [0,1]");
    tau_ = std::max(tau_, ex.x.nnz());
  }
}

std::size_t Dataset::count_positive() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(examples_.begin(), examples_.end(), [](const LabeledExample& e) { return e.y >= 0.5; }));
}

std::vector<double> Dataset::labels() const {
  std::vector<double> out;
  out.reserve(examples_.size());
  for (const auto& e : examples_) out.push_back(e.y);
  return out;
}

Dataset Dataset::concat(const Dataset& a, const Dataset& b) {
  if (a.dim() != b.dim()) throw ValidationError("concat: dimension mismatch");
  std::vector<LabeledExample> all;
  all.reserve(a.size() + b.size());
  all.insert(all.end(), a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  return Dataset(std::move(all), a.dim());
}

Dataset Dataset::with_dim(std::size_t dim) const {
  if (dim < dim_) throw ValidationError("with_dim: cannot shrink dataset dimension");
  std::vector<LabeledExample> out = examples_;
  for (auto& ex : out) ex.x.set_dim(dim);
  return Dataset(std::move(out), dim);
}

LabeledExample parse_sparse_line(std::string_view line, std::optional<std::size_t> dim,
                                 const ParseOptions& opts, std::size_t line_no) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < line.size() && is_space(line[pos])) ++pos;
  };
  auto token_end = [&] {
    std::size_t e = pos;
    while (e < line.size() && !is_space(line[e])) ++e;
    return e;
  };

  skip_space();
  if (pos >= line.size()) throw ParseError("missing label", line_no, pos + 1);

  LabeledExample ex;
  {
    const std::size_t end = token_end();
    const char* first = line.data() + pos;
    const char* last = line.data() + end;
    auto [ptr, ec] = std::from_chars(first, last, ex.y);
    if (ec != std::errc() || ptr != last) throw ParseError("malformed label", line_no, pos + 1);
    if (!(ex.y >= 0.0 && ex.y <= 1.0)) throw ParseError("label outside [0,1]", line_no, pos + 1);
    pos = end;
  }

  std::vector<SparseEntry> entries;
  std::vector<std::size_t> columns;
  for (skip_space(); pos < line.size(); skip_space()) {
    const std::size_t end = token_end();
    const std::string_view tok = line.substr(pos, end - pos);
    const std::size_t colon = tok.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size())
      throw ParseError("expected idx:val", line_no, pos + 1);

    SparseEntry e;
    {
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + colon, e.index);
      if (ec != std::errc() || ptr != tok.data() + colon)
        throw ParseError("malformed feature index", line_no, pos + 1);
    }
    {
      const char* first = tok.data() + colon + 1;
      const char* last = tok.data() + tok.size();
      auto [ptr, ec] = std::from_chars(first, last, e.value);
      if (ec != std::errc() || ptr != last)
        throw ParseError("malformed feature value", line_no, pos + colon + 2);
      if (!std::isfinite(e.value)) throw ParseError("non-finite feature value", line_no, pos + colon + 2);
    }
    if (std::fabs(e.value) > 1.0) {
      if (!opts.clamp)
        throw ValidationError((line_no ? "line " + std::to_string(line_no) + ", " : std::string()) +
                              "column " + std::to_string(pos + colon + 2) + ": |value| > 1 for feature " +
                              std::to_string(e.index) + "; use clamping to accept it");
      e.value = e.value > 0 ? 1.0 : -1.0;
    }
    if (dim && e.index >= *dim)
      throw ParseError("feature index " + std::to_string(e.index) + " >= dim " + std::to_string(*dim), line_no,
                       pos + 1);
    entries.push_back(e);
    columns.push_back(pos + 1);
    pos = end;
  }

  // duplicate detection needs the original column for the message
  std::vector<std::size_t> order(entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return entries[a].index < entries[b].index; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (entries[order[i]].index == entries[order[i - 1]].index)
      throw ParseError("duplicate feature index " + std::to_string(entries[order[i]].index), line_no,
                       columns[order[i]]);
  }

  std::size_t m = 0;
  if (dim) {
    m = *dim;
  } else {
    for (const auto& e : entries) m = std::max<std::size_t>(m, std::size_t{e.index} + 1);
  }
  ex.x = SparseVector::from_entries(std::move(entries), m);
  return ex;
}

std::string format_sparse_line(const LabeledExample& ex) {
  std::string out = format_double(ex.y);
  for (const auto& e : ex.x.entries()) {
    out += ' ';
    out += std::to_string(e.index);
    out += ':';
    out += format_double(e.value);
  }
  return out;
}

Dataset read_sparse(std::istream& in, std::optional<std::size_t> dim, const ParseOptions& opts) {
  std::vector<LabeledExample> examples;
  std::optional<std::size_t> declared = dim;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv(line);
    std::size_t first = 0;
    while (first < sv.size() && is_space(sv[first])) ++first;
    if (first == sv.size()) continue;
    if (sv[first] == '#') {
      constexpr std::string_view key = "dim=";
      std::string_view rest = sv.substr(first + 1);
      while (!rest.empty() && is_space(rest.front())) rest.remove_prefix(1);
      if (!dim && rest.starts_with(key)) {
        std::size_t m = 0;
        rest.remove_prefix(key.size());
        auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), m);
        if (ec != std::errc()) throw ParseError("malformed dim header", line_no, first + 1);
        declared = m;
      }
      continue;
    }
    examples.push_back(parse_sparse_line(sv, declared, opts, line_no));
  }
  if (in.bad()) throw IoError("read failure");

  std::size_t m = declared.value_or(0);
  if (!declared) {
    for (const auto& ex : examples) m = std::max(m, ex.x.dim());
  }
  for (auto& ex : examples) ex.x.set_dim(m);
  return Dataset(std::move(examples), m);
}

Dataset read_sparse_file(const std::string& path, std::optional<std::size_t> dim, const ParseOptions& opts) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return read_sparse(in, dim, opts);
  } catch (const ParseError& e) {
    throw ParseError(e.detail(), e.line(), e.column(), path);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_sparse(std::ostream& out, const Dataset& data, std::span<const std::string> comments) {
  out << "# dim=" << data.dim() << '\n';
  for (const auto& c : comments) out << '#' << c << '\n';
  for (const auto& ex : data) out << format_sparse_line(ex) << '\n';
}

void write_sparse_file(const std::string& path, const Dataset& data, std::span<const std::string> comments) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_sparse(out, data, comments);
  if (!out) throw IoError("write failure on " + path);
}

}  // namespace smfm
