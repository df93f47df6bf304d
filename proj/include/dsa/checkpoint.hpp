#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "dsa/nn.hpp"

namespace dsa::nn {

// Text checkpoint:
//   ddqsa-ckpt v1
//   <layer dims, space separated>
//   per layer: weight matrix row-major (one row per line), then the bias on one line
// Values are written with 17 significant digits so a round trip is exact.
inline constexpr const char* kCheckpointHeader = "ddqsa-ckpt v1";

void write_checkpoint(std::ostream& out, const MlpParams& params);
MlpParams read_checkpoint(std::istream& in);

// Writes to a temporary sibling and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const MlpParams& params);
MlpParams load_checkpoint(const std::filesystem::path& path);

// Writes `contents` to `path` through a temp file + rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

} // namespace dsa::nn
