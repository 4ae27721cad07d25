#pragma once

#include <cstddef>

namespace wolbachia {

/// Vertex-centred uniform grid on [-half_width, half_width]^dimension.
struct UniformGrid {
    int dimension = 1;
    double half_width = 1.0;
    std::size_t nodes = 16;  ///< per axis

    double dx() const { return 2.0 * half_width / static_cast<double>(nodes - 1); }
    double coordinate(std::size_t i) const { return -half_width + dx() * static_cast<double>(i); }
    std::size_t size() const { return dimension == 1 ? nodes : nodes * nodes; }
};

}  // namespace wolbachia
