#pragma once

#include <string>

#include "trajfuse/network.hpp"

namespace trajfuse {

// Checkpoint layout: 8-byte magic "TSTCKPT1", a little-endian uint64 byte
// length, that many bytes of JSON model config, then every parameter tensor
// as raw little-endian float64 in for_each_tensor order.
void save_checkpoint(const std::string& path, const TwoStreamModelParams& params);
TwoStreamModelParams load_checkpoint(const std::string& path);

}  // namespace trajfuse
