#pragma once

#include <map>
#include <string>

#include "json.hpp"

#include "aec/config.hpp"
#include "aec/tensor.hpp"

namespace aec {

// Checkpoint file format (little-endian):
//   magic "AGZE", format version u16,
//   u32 JSON length + JSON bytes ({"config": {...}, "meta": {...}}),
//   u32 tensor count,
//   per tensor: u32 name length, name bytes, u32 rank, u32 dims[rank],
//               f32 data (numel * 4 bytes).
// Tensor names are sorted, JSON keys are sorted: equal contents produce
// byte-identical files.
inline constexpr std::uint16_t kCheckpointVersion = 1;

struct Checkpoint {
    RunConfig config;
    nlohmann::json meta;  // adam step counters, rng states, buffer cursors, ...
    std::map<std::string, Tensor> tensors;
};

void checkpoint_save(const std::string& path, const Checkpoint& ckpt);
// Throws std::runtime_error on missing file, bad magic/version or
// truncation; never returns a partial checkpoint.
Checkpoint checkpoint_load(const std::string& path);

}  // namespace aec
