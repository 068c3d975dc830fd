#include "mrdf/tsne.hpp"

#include <cmath>

#include "mrdf/errors.hpp"
#include "mrdf/rng.hpp"

namespace mrdf {

namespace {

// Row-wise conditional distributions P(j|i) with the bandwidth calibrated by
// bisection so each row's perplexity matches the target.
Mat conditional_affinities(const Mat& dist2, double perplexity) {
    const Eigen::Index n = dist2.rows();
    Mat p = Mat::Zero(n, n);
    const double log_perp = std::log(perplexity);
    for (Eigen::Index i = 0; i < n; ++i) {
        double beta = 1.0, beta_lo = 0.0, beta_hi = std::numeric_limits<double>::infinity();
        Eigen::RowVectorXd row;
        for (int it = 0; it < 64; ++it) {
            row = (-beta * dist2.row(i).array()).exp().matrix();
            row(i) = 0.0;
            const double sum = row.sum();
            if (sum <= 0.0) {
                beta /= 2.0;
                continue;
            }
            row /= sum;
            double entropy = 0.0;
            for (Eigen::Index j = 0; j < n; ++j)
                if (row(j) > 1e-300) entropy -= row(j) * std::log(row(j));
            const double diff = entropy - log_perp;
            if (std::abs(diff) < 1e-5) break;
            if (diff > 0.0) { // entropy too high: sharpen
                beta_lo = beta;
                beta = std::isinf(beta_hi) ? beta * 2.0 : (beta + beta_hi) / 2.0;
            } else {
                beta_hi = beta;
                beta = (beta + beta_lo) / 2.0;
            }
        }
        p.row(i) = row;
    }
    return p;
}

} // namespace

Mat tsne_2d(const Mat& points, const TsneConfig& cfg) {
    const Eigen::Index n = points.rows();
    if (cfg.perplexity <= 1.0) throw DataError("tsne: perplexity must exceed 1");
    if (static_cast<double>(n) <= 3.0 * cfg.perplexity)
        throw DataError("tsne: need more than 3*perplexity points, got " + std::to_string(n) +
                        " for perplexity " + std::to_string(cfg.perplexity));

    // Pairwise squared distances in the input space.
    Mat dist2(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dist2(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (points.row(i) - points.row(j)).squaredNorm();
            dist2(i, j) = d;
            dist2(j, i) = d;
        }
    }

    Mat p = conditional_affinities(dist2, cfg.perplexity);
    p = (p + p.transpose()).eval() / (2.0 * static_cast<double>(n));
    p = p.cwiseMax(1e-12);

    Rng rng(cfg.seed);
    Mat y(n, 2);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = rng.gaussian(0.0, 1e-4);
    Mat velocity = Mat::Zero(n, 2);
    Mat gains = Mat::Ones(n, 2);

    for (int it = 0; it < cfg.iterations; ++it) {
        const double exaggeration = it < cfg.exaggeration_iters ? cfg.early_exaggeration : 1.0;

        // Student-t affinities in the embedding.
        Mat num(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            num(i, i) = 0.0;
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double q = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
                num(i, j) = q;
                num(j, i) = q;
            }
        }
        const double qsum = std::max(num.sum(), 1e-12);

        Mat grad = Mat::Zero(n, 2);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i == j) continue;
                const double q = num(i, j) / qsum;
                const double coeff = 4.0 * (exaggeration * p(i, j) - q) * num(i, j);
                grad.row(i) += coeff * (y.row(i) - y.row(j));
            }
        }

        const double momentum = it < 250 ? 0.5 : 0.8;
        for (Eigen::Index i = 0; i < gains.size(); ++i) {
            gains(i) = (grad(i) > 0.0) == (velocity(i) > 0.0) ? std::max(gains(i) * 0.8, 0.01)
                                                              : gains(i) + 0.2;
        }
        velocity = momentum * velocity - cfg.learning_rate * gains.cwiseProduct(grad);
        y += velocity;
        y.rowwise() -= y.colwise().mean(); // keep the embedding centered
    }
    return y;
}

} // namespace mrdf
