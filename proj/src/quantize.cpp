#include "nmsoc/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nmsoc::compiler {
namespace {

void require_levels(int levels)
{
    if (!core::supported_codebook_parameter(levels)) {
        throw std::invalid_argument("codebook size N must be 4, 8 or 16, got " + std::to_string(levels));
    }
}

std::uint8_t nearest(const std::vector<double>& centroids, double w)
{
    std::size_t best = 0;
    double best_d = std::abs(w - centroids[0]);
    for (std::size_t i = 1; i < centroids.size(); ++i) {
        const double d = std::abs(w - centroids[i]);
        if (d < best_d) {
            best = i;
            best_d = d;
        }
    }
    return static_cast<std::uint8_t>(best);
}

double sse(std::span<const double> weights, const std::vector<double>& centroids,
    const std::vector<std::uint8_t>& indexes)
{
    double s = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double e = weights[i] - centroids[indexes[i]];
        s += e * e;
    }
    return s;
}

} // namespace

GridQuantizer uniform_quantize(std::span<const double> weights, int levels)
{
    require_levels(levels);
    if (weights.empty()) {
        throw std::invalid_argument("cannot quantize an empty weight list");
    }
    const auto [lo_it, hi_it] = std::minmax_element(weights.begin(), weights.end());
    const double lo = *lo_it;
    const double step = (*hi_it - lo) / levels;
    GridQuantizer q;
    for (int i = 0; i < levels; ++i) {
        q.levels.push_back(lo + (i + 0.5) * step);
    }
    for (double w : weights) {
        int bin = step > 0 ? static_cast<int>(std::floor((w - lo) / step)) : 0;
        bin = std::clamp(bin, 0, levels - 1);
        q.indexes.push_back(static_cast<std::uint8_t>(bin));
    }
    q.mse = sse(weights, q.levels, q.indexes) / static_cast<double>(weights.size());
    return q;
}

LloydMaxResult lloyd_max(std::span<const double> weights, int levels)
{
    require_levels(levels);
    if (weights.empty()) {
        throw std::invalid_argument("cannot quantize an empty weight list");
    }
    const auto n = static_cast<double>(weights.size());
    LloydMaxResult r;
    const auto grid = uniform_quantize(weights, levels);
    r.uniform_mse = grid.mse;

    std::vector<double> distinct(weights.begin(), weights.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    if (distinct.size() <= static_cast<std::size_t>(levels)) {
        r.centroids = distinct;
        r.centroids.resize(static_cast<std::size_t>(levels), distinct.back());
        for (double w : weights) {
            r.indexes.push_back(nearest(r.centroids, w));
        }
        r.objective = {grid.mse * n, sse(weights, r.centroids, r.indexes)};
    } else {
        r.centroids = grid.levels;
        r.indexes = grid.indexes;
        r.objective.push_back(grid.mse * n);
        for (int it = 0; it < kLloydMaxIterations; ++it) {
            std::vector<double> sum(r.centroids.size(), 0.0);
            std::vector<std::size_t> count(r.centroids.size(), 0);
            for (std::size_t i = 0; i < weights.size(); ++i) {
                sum[r.indexes[i]] += weights[i];
                ++count[r.indexes[i]];
            }
            const auto prev_centroids = r.centroids;
            const auto prev_indexes = r.indexes;
            double shift = 0;
            for (std::size_t c = 0; c < r.centroids.size(); ++c) {
                if (count[c] > 0) {
                    const double next = sum[c] / static_cast<double>(count[c]);
                    shift = std::max(shift, std::abs(next - r.centroids[c]));
                    r.centroids[c] = next;
                }
            }
            for (std::size_t i = 0; i < weights.size(); ++i) {
                r.indexes[i] = nearest(r.centroids, weights[i]);
            }
            const double obj = sse(weights, r.centroids, r.indexes);
            if (obj > r.objective.back()) {
                // Rounding noise at convergence; keep the better previous step.
                r.centroids = prev_centroids;
                r.indexes = prev_indexes;
                break;
            }
            r.objective.push_back(obj);
            r.iterations = it + 1;
            if (shift <= kLloydTolerance) {
                break;
            }
        }
    }
    r.occupancy.assign(r.centroids.size(), 0);
    for (auto i : r.indexes) {
        ++r.occupancy[i];
    }
    r.mse = r.objective.back() / n;
    return r;
}

QuantizedWeights quantize_codebook(std::span<const double> weights, int levels, int width, double max_scale)
{
    require_levels(levels);
    if (!core::supported_codebook_parameter(width)) {
        throw std::invalid_argument("weight width W must be 4, 8 or 16, got " + std::to_string(width));
    }
    auto report = lloyd_max(weights, levels);
    double peak = 0;
    for (double c : report.centroids) {
        peak = std::max(peak, std::abs(c));
    }
    const double top = (1 << (width - 1)) - 1;
    double scale = peak > 0 ? top / peak : 1.0;
    if (max_scale > 0) {
        scale = std::min(scale, max_scale);
    }
    std::vector<std::int32_t> values;
    for (double c : report.centroids) {
        const double v = std::clamp(std::round(c * scale), -top - 1, top);
        values.push_back(static_cast<std::int32_t>(v));
    }
    QuantizedWeights q{core::WeightCodebook(std::move(values), width), report.indexes, scale, std::move(report)};
    return q;
}

} // namespace nmsoc::compiler
