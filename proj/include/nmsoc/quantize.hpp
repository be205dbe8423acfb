#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nmsoc/core.hpp"

namespace nmsoc::compiler {

/// Uniform-grid quantizer: N equal bins over [min, max], each reproduced by
/// its midpoint.
struct GridQuantizer {
    std::vector<double> levels;
    std::vector<std::uint8_t> indexes;
    double mse = 0;
};

GridQuantizer uniform_quantize(std::span<const double> weights, int levels);

struct LloydMaxResult {
    std::vector<double> centroids;     // exactly N, ascending
    std::vector<std::uint8_t> indexes; // nearest centroid, ties to the lower index
    std::vector<double> objective;     // sum of squared errors, initial grid first
    std::vector<std::size_t> occupancy;
    int iterations = 0;
    double mse = 0;
    double uniform_mse = 0;
};

inline constexpr double kLloydTolerance = 1e-9;
inline constexpr int kLloydMaxIterations = 200;

/// 1-D Lloyd-Max (k-means) from the uniform-grid initialization. Inputs with
/// at most N distinct values are represented exactly.
LloydMaxResult lloyd_max(std::span<const double> weights, int levels);

struct QuantizedWeights {
    core::WeightCodebook codebook;
    std::vector<std::uint8_t> indexes;
    double scale = 1.0; // integer units per real unit
    LloydMaxResult report;
};

/// Lloyd-Max codebook scaled into W-bit integers. The scale maps the largest
/// centroid magnitude to 2^(W-1)-1 and never exceeds `max_scale`.
/// Throws std::invalid_argument if N or W is not 4, 8 or 16 or `weights` is empty.
QuantizedWeights quantize_codebook(std::span<const double> weights, int levels, int width,
    double max_scale = 1e300);

} // namespace nmsoc::compiler
