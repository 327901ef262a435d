#include "smfm/rng.hpp"

namespace smfm {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view name, std::uint64_t index) noexcept {
  // FNV-1a over the stream name
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(mix64(master ^ h) + index);
}

SeedStreams SeedStreams::from_master(std::uint64_t master) noexcept {
  SeedStreams s;
  s.split = derive_seed(master, "split");
  s.negatives = derive_seed(master, "negatives");
  s.mixing = derive_seed(master, "mixing");
  s.init = derive_seed(master, "init");
  s.shuffle = derive_seed(master, "shuffle");
  return s;
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(rng);
}

}  // namespace smfm
