#include "smfm/checkpoint.hpp"

#include "smfm/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace smfm {

namespace {

constexpr std::string_view kMagic = "smfm-checkpoint 1";

double read_double(std::istringstream& ss, const char* what) {
  std::string tok;
  if (!(ss >> tok)) throw ValidationError(std::string("checkpoint: missing ") + what);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ValidationError(std::string("checkpoint: malformed ") + what + " '" + tok + "'");
  return v;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void save_checkpoint(std::ostream& out, const FmParams& params) {
  std::string body;
  body += kMagic;
  body += "\nm " + std::to_string(params.m) + " d " + std::to_string(params.d) + "\n";
  body += "w0 " + format_double(params.w0) + "\n";
  body += "w";
  for (double x : params.w) body += " " + format_double(x);
  body += "\n";
  for (std::size_t i = 0; i < params.m; ++i) {
    body += "v";
    for (double x : params.v(i)) body += " " + format_double(x);
    body += "\n";
  }
  out << body << "checksum " << hex64(fnv1a64(body)) << "\n";
}

void save_checkpoint_file(const std::string& path, const FmParams& params) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint " + path);
  save_checkpoint(out, params);
  if (!out) throw IoError("write failure on " + path);
}

FmParams load_checkpoint(std::istream& in) {
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto pos = text.rfind("checksum ");
  if (pos == std::string::npos) throw ValidationError("checkpoint: missing checksum");
  const std::string body = text.substr(0, pos);
  std::string stored = text.substr(pos + 9);
  while (!stored.empty() && (stored.back() == '\n' || stored.back() == '\r')) stored.pop_back();
  if (stored != hex64(fnv1a64(body))) throw ValidationError("checkpoint: checksum mismatch");

  std::istringstream lines(body);
  std::string line;
  if (!std::getline(lines, line) || line != kMagic) throw ValidationError("checkpoint: bad header");

  std::size_t m = 0, d = 0;
  {
    std::getline(lines, line);
    std::istringstream ss(line);
    std::string km, kd;
    if (!(ss >> km >> m >> kd >> d) || km != "m" || kd != "d") throw ValidationError("checkpoint: bad shape line");
  }
  FmParams p(m, d);
  auto expect_tag = [&](std::istringstream& ss, const char* tag) {
    std::string t;
    if (!(ss >> t) || t != tag) throw ValidationError(std::string("checkpoint: expected '") + tag + "' line");
  };
  {
    std::getline(lines, line);
    std::istringstream ss(line);
    expect_tag(ss, "w0");
    p.w0 = read_double(ss, "w0");
  }
  {
    std::getline(lines, line);
    std::istringstream ss(line);
    expect_tag(ss, "w");
    for (auto& x : p.w) x = read_double(ss, "w");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::getline(lines, line)) throw ValidationError("checkpoint: truncated embeddings");
    std::istringstream ss(line);
    expect_tag(ss, "v");
    for (auto& x : p.v(i)) x = read_double(ss, "v");
  }
  if (!p.all_finite()) throw ValidationError("checkpoint: non-finite parameter");
  return p;
}

FmParams load_checkpoint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint " + path);
  return load_checkpoint(in);
}

}  // namespace smfm
