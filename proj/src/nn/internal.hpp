#pragma once

#include "seco/nn/model.hpp"

namespace seco::nn {

// Fuses the linear layers layers[first..last] into one block.
LinearBlock fuse_block(const std::vector<LayerSpec>& layers, size_t first, size_t last, uint32_t scale);

}  // namespace seco::nn
