#pragma once

#include "smfm/fm.hpp"
#include "smfm/rng.hpp"
#include "smfm/sparse.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace smfm::testing {

inline SparseVector random_sparse(std::size_t m, std::size_t max_nnz, Rng& rng, bool binary = false) {
  std::vector<FeatureIndex> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = static_cast<FeatureIndex>(i);
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::size_t nnz = uniform_index(rng, std::min(max_nnz, m) + 1);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::vector<SparseEntry> entries;
  for (std::size_t k = 0; k < nnz; ++k) {
    double v = binary ? 1.0 : val(rng);
    if (v == 0.0) v = 0.5;
    entries.push_back({idx[k], v});
  }
  return SparseVector::from_entries(std::move(entries), m);
}

inline FmParams random_params(std::size_t m, std::size_t d, Rng& rng, double scale = 0.5) {
  FmParams p(m, d);
  std::normal_distribution<double> n(0.0, scale);
  p.w0 = n(rng);
  for (auto& w : p.w) w = n(rng);
  for (auto& v : p.V) v = n(rng);
  return p;
}

inline Dataset random_dataset(std::size_t n, std::size_t m, std::size_t max_nnz, Rng& rng, bool soft = false) {
  std::vector<LabeledExample> out;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    LabeledExample ex;
    ex.x = random_sparse(m, max_nnz, rng);
    ex.y = soft ? u(rng) : (u(rng) < 0.5 ? 0.0 : 1.0);
    out.push_back(std::move(ex));
  }
  return Dataset(std::move(out), m);
}

inline std::vector<double> to_dense(const SparseVector& x) {
  std::vector<double> d(x.dim(), 0.0);
  for (const auto& e : x.entries()) d[e.index] = e.value;
  return d;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("smfm-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace smfm::testing
