#pragma once

#include "smfm/fm.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace smfm {

/// Text checkpoint of (m, d, w0, w, V):
///
///   smfm-checkpoint 1
///   m <m> d <d>
///   w0 <value>
///   w <m values>
///   v <d values>          (one line per feature)
///   checksum <16 hex digits>
///
/// The checksum is FNV-1a 64 over every byte preceding the checksum line.
/// Values are written in shortest round-trip form, so save/load is exact.
void save_checkpoint(std::ostream& out, const FmParams& params);
void save_checkpoint_file(const std::string& path, const FmParams& params);

/// Throws ValidationError on a malformed file or checksum mismatch.
FmParams load_checkpoint(std::istream& in);
FmParams load_checkpoint_file(const std::string& path);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace smfm
