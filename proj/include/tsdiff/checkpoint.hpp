#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsdiff/denoiser.hpp"

namespace tsdiff {

// Binary checkpoint container (see README for the byte layout):
//   magic "TSDF", u32 version, u64 meta length, meta JSON (UTF-8),
//   u64 array count, then per array: u32 name length, name bytes,
//   u64 element count, raw little-endian doubles (row-major).
// The meta JSON carries the resolved run config (including schedule
// parameters and scaler state), the epoch counter, and the root seed.
// Doubles round-trip bit-exactly.
struct Checkpoint {
    nlohmann::json meta;
    std::vector<std::pair<std::string, std::vector<double>>> arrays;
};

void save_checkpoint(const std::string& path, const nlohmann::json& meta, DenoiserModel& model);

Checkpoint load_checkpoint(const std::string& path);

// Copies arrays into the model by name. Throws DataError on a missing name or
// size mismatch.
void apply_parameters(DenoiserModel& model, const Checkpoint& ckpt);

}  // namespace tsdiff
