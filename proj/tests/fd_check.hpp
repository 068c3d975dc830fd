#pragma once

// Central finite-difference gradient checking against the tape's analytic
// gradients. Each scalar function is rebuilt from scratch per evaluation so
// the oracle never reuses the implementation's backward path.

#include <cmath>
#include <functional>
#include <vector>

#include "mrdf/autodiff.hpp"

namespace fdtest {

using mrdf::Mat;

// f: builds the scalar from the given input matrices (fresh tape inside).
using ScalarFn = std::function<double(const std::vector<Mat>&)>;

inline std::vector<Mat> fd_gradients(const ScalarFn& f, std::vector<Mat> inputs,
                                     double step = 1e-5) {
    std::vector<Mat> grads;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        Mat g(inputs[k].rows(), inputs[k].cols());
        for (Eigen::Index i = 0; i < inputs[k].size(); ++i) {
            const double keep = inputs[k](i);
            inputs[k](i) = keep + step;
            const double up = f(inputs);
            inputs[k](i) = keep - step;
            const double dn = f(inputs);
            inputs[k](i) = keep;
            g(i) = (up - dn) / (2.0 * step);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

// max_i |a_i - b_i| / max(1, |a_i|, |b_i|)
inline double rel_error(const Mat& a, const Mat& b) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double denom = std::max({1.0, std::abs(a(i)), std::abs(b(i))});
        worst = std::max(worst, std::abs(a(i) - b(i)) / denom);
    }
    return worst;
}

inline mrdf::Mat random_mat(mrdf::Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = scale * rng.gaussian();
    return m;
}

} // namespace fdtest
