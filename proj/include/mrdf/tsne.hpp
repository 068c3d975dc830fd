#pragma once

#include <cstdint>

#include "mrdf/types.hpp"

namespace mrdf {

struct TsneConfig {
    double perplexity = 30.0;
    int iterations = 600;
    double learning_rate = 200.0;
    double early_exaggeration = 12.0;
    int exaggeration_iters = 200;
    std::uint64_t seed = 0;
};

// Exact (O(N^2)) t-SNE to two dimensions. Requires N > 3 * perplexity.
Mat tsne_2d(const Mat& points, const TsneConfig& cfg);

} // namespace mrdf
