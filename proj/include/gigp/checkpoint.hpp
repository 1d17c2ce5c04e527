#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gigp/tensor.hpp"

namespace gigp::harness {

// Little-endian binary checkpoint. Layout:
//   magic "GIGP", version u32, tensor count u32, then per tensor:
//   name length u32, name bytes, rank u32, dims u32 each, raw f64 values.
void save_checkpoint(
    const std::string& path,
    const std::vector<std::pair<std::string, const nn::Tensor*>>& tensors);

std::map<std::string, nn::Tensor> load_checkpoint(const std::string& path);

}  // namespace gigp::harness
