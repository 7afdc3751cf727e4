#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "wavad/autograd.hpp"
#include "wavad/model.hpp"

namespace wavad {

// Optimizer state parallel to VadNetwork::parameters() order.
using OptimizerStateSet = std::vector<RmsPropState>;

// Binary container: 8-byte magic "WVADCKP\n", u32 format version, u64 header
// length, JSON header (config echo, seed, tensor directory), then raw
// little-endian doubles in directory order. Including the optimizer state
// makes the checkpoint resumable.
void save_checkpoint(VadNetwork& net, const std::filesystem::path& path,
                     const OptimizerStateSet* optimizer = nullptr);

struct RestoredCheckpoint {
  VadNetwork net;
  std::optional<OptimizerStateSet> optimizer;
};

// Throws FormatError on bad magic, version mismatch or truncation; never
// returns a partially loaded network.
RestoredCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace wavad
