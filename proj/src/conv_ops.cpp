#include "mrdf/conv_ops.hpp"

#include <cmath>

#include "mrdf/errors.hpp"

namespace mrdf::ad {

namespace {

// Patch matrix for one frame: [OH*OW x Cin*KH*KW]; out-of-bounds taps are 0.
Mat im2col(const Eigen::Ref<const Eigen::RowVectorXd>& frame, const Conv2dMeta& m) {
    const int oh = m.out_h(), ow = m.out_w();
    Mat cols = Mat::Zero(static_cast<Eigen::Index>(oh) * ow,
                         static_cast<Eigen::Index>(m.in_channels) * m.kh * m.kw);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            const Eigen::Index prow = static_cast<Eigen::Index>(oy) * ow + ox;
            for (int c = 0; c < m.in_channels; ++c) {
                for (int ky = 0; ky < m.kh; ++ky) {
                    const int iy = oy * m.stride_h - m.pad_h + ky;
                    if (iy < 0 || iy >= m.in_h) continue;
                    for (int kx = 0; kx < m.kw; ++kx) {
                        const int ix = ox * m.stride_w - m.pad_w + kx;
                        if (ix < 0 || ix >= m.in_w) continue;
                        cols(prow, (static_cast<Eigen::Index>(c) * m.kh + ky) * m.kw + kx) =
                            frame(static_cast<Eigen::Index>(c) * m.in_h * m.in_w +
                                  static_cast<Eigen::Index>(iy) * m.in_w + ix);
                    }
                }
            }
        }
    }
    return cols;
}

// Scatter-add of patch gradients back onto the input frame.
void col2im_add(Eigen::Ref<Eigen::RowVectorXd> frame_grad, const Mat& cols_grad,
                const Conv2dMeta& m) {
    const int oh = m.out_h(), ow = m.out_w();
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            const Eigen::Index prow = static_cast<Eigen::Index>(oy) * ow + ox;
            for (int c = 0; c < m.in_channels; ++c) {
                for (int ky = 0; ky < m.kh; ++ky) {
                    const int iy = oy * m.stride_h - m.pad_h + ky;
                    if (iy < 0 || iy >= m.in_h) continue;
                    for (int kx = 0; kx < m.kw; ++kx) {
                        const int ix = ox * m.stride_w - m.pad_w + kx;
                        if (ix < 0 || ix >= m.in_w) continue;
                        frame_grad(static_cast<Eigen::Index>(c) * m.in_h * m.in_w +
                                   static_cast<Eigen::Index>(iy) * m.in_w + ix) +=
                            cols_grad(prow, (static_cast<Eigen::Index>(c) * m.kh + ky) * m.kw + kx);
                    }
                }
            }
        }
    }
}

} // namespace

Var conv2d(Var x, Var weight, Var bias, const Conv2dMeta& meta) {
    Tape* t = x.tape();
    const Eigen::Index want_in = static_cast<Eigen::Index>(meta.in_channels) * meta.in_h * meta.in_w;
    if (x.cols() != want_in)
        throw NumericError("conv2d: input cols " + std::to_string(x.cols()) +
                           " do not match meta " + std::to_string(want_in));
    if (weight.rows() != meta.out_channels ||
        weight.cols() != static_cast<Eigen::Index>(meta.in_channels) * meta.kh * meta.kw)
        throw NumericError("conv2d: weight shape mismatch");
    if (meta.out_h() < 1 || meta.out_w() < 1)
        throw NumericError("conv2d: kernel does not fit input");
    const bool has_bias = bias.valid();
    if (has_bias && (bias.rows() != 1 || bias.cols() != meta.out_channels))
        throw NumericError("conv2d: bias must be [1 x Cout]");

    const bool ng = t->needs_grad(x) || t->needs_grad(weight) || (has_bias && t->needs_grad(bias));
    const int ixv = x.index(), iw = weight.index();
    const int ibv = has_bias ? bias.index() : -1;

    const Mat& xv = x.value();
    const int oh = meta.out_h(), ow = meta.out_w();
    const Eigen::Index spatial = static_cast<Eigen::Index>(oh) * ow;
    Mat out(xv.rows(), static_cast<Eigen::Index>(meta.out_channels) * spatial);
    for (Eigen::Index f = 0; f < xv.rows(); ++f) {
        const Mat cols = im2col(xv.row(f), meta);
        Mat o = cols * weight.value().transpose(); // [OH*OW x Cout]
        if (has_bias) o.rowwise() += bias.value().row(0);
        for (int c = 0; c < meta.out_channels; ++c)
            out.row(f).segment(static_cast<Eigen::Index>(c) * spatial, spatial) =
                o.col(c).transpose();
    }

    Conv2dMeta m = meta;
    return t->make(std::move(out), ng, [t, ixv, iw, ibv, m, spatial](const Mat& g) {
        const Mat& xv = t->val(ixv);
        const Mat& wv = t->val(iw);
        Mat dx = Mat::Zero(xv.rows(), xv.cols());
        Mat dw = Mat::Zero(wv.rows(), wv.cols());
        Eigen::RowVectorXd db = Eigen::RowVectorXd::Zero(m.out_channels);
        for (Eigen::Index f = 0; f < xv.rows(); ++f) {
            Mat go(spatial, m.out_channels); // [OH*OW x Cout]
            for (int c = 0; c < m.out_channels; ++c)
                go.col(c) =
                    g.row(f).segment(static_cast<Eigen::Index>(c) * spatial, spatial).transpose();
            const Mat cols = im2col(xv.row(f), m);
            dw += go.transpose() * cols;
            db += go.colwise().sum();
            const Mat dcols = go * wv; // [OH*OW x Cin*KH*KW]
            Eigen::RowVectorXd fg = Eigen::RowVectorXd::Zero(xv.cols());
            col2im_add(fg, dcols, m);
            dx.row(f) = fg;
        }
        t->accumulate(ixv, dx);
        t->accumulate(iw, dw);
        if (ibv >= 0) t->accumulate(ibv, db);
    });
}

Var batch_norm2d(Var x, Var gamma, Var beta, Mat* running_mean, Mat* running_var, int channels,
                 bool training, double momentum, double eps) {
    Tape* t = x.tape();
    if (x.cols() % channels != 0) throw NumericError("batch_norm2d: cols not divisible by channels");
    const Eigen::Index spatial = x.cols() / channels;
    if (gamma.rows() != 1 || gamma.cols() != channels || beta.rows() != 1 || beta.cols() != channels)
        throw NumericError("batch_norm2d: gamma/beta must be [1 x C]");

    const bool ng = t->needs_grad(x) || t->needs_grad(gamma) || t->needs_grad(beta);
    const int ix = x.index(), ig = gamma.index(), ib = beta.index();
    const Mat& xv = x.value();
    const double m_count = static_cast<double>(xv.rows() * spatial);

    Vec mean(channels), var(channels);
    if (training) {
        for (int c = 0; c < channels; ++c) {
            const auto block = xv.middleCols(static_cast<Eigen::Index>(c) * spatial, spatial);
            mean(c) = block.mean();
            var(c) = (block.array() - mean(c)).square().mean();
        }
        if (running_mean && running_var) {
            for (int c = 0; c < channels; ++c) {
                (*running_mean)(0, c) = (1.0 - momentum) * (*running_mean)(0, c) + momentum * mean(c);
                (*running_var)(0, c) = (1.0 - momentum) * (*running_var)(0, c) + momentum * var(c);
            }
        }
    } else {
        if (!running_mean || !running_var)
            throw NumericError("batch_norm2d: eval mode requires running statistics");
        for (int c = 0; c < channels; ++c) {
            mean(c) = (*running_mean)(0, c);
            var(c) = (*running_var)(0, c);
        }
    }

    Mat xhat(xv.rows(), xv.cols());
    Mat y(xv.rows(), xv.cols());
    Vec inv_std(channels);
    for (int c = 0; c < channels; ++c) {
        inv_std(c) = 1.0 / std::sqrt(var(c) + eps);
        const auto block = xv.middleCols(static_cast<Eigen::Index>(c) * spatial, spatial);
        xhat.middleCols(static_cast<Eigen::Index>(c) * spatial, spatial) =
            ((block.array() - mean(c)) * inv_std(c)).matrix();
        y.middleCols(static_cast<Eigen::Index>(c) * spatial, spatial) =
            xhat.middleCols(static_cast<Eigen::Index>(c) * spatial, spatial) *
                gamma.value()(0, c) +
            Mat::Constant(xv.rows(), spatial, beta.value()(0, c));
    }

    const bool use_batch_stats = training;
    return t->make(std::move(y), ng,
                   [t, ix, ig, ib, xhat, inv_std, spatial, channels, m_count,
                    use_batch_stats](const Mat& g) {
        const Mat& gamma = t->val(ig);
        Mat dx(g.rows(), g.cols());
        Eigen::RowVectorXd dgamma = Eigen::RowVectorXd::Zero(channels);
        Eigen::RowVectorXd dbeta = Eigen::RowVectorXd::Zero(channels);
        for (int c = 0; c < channels; ++c) {
            const auto gb = g.middleCols(static_cast<Eigen::Index>(c) * spatial, spatial);
            const auto xb = xhat.middleCols(static_cast<Eigen::Index>(c) * spatial, spatial);
            dgamma(c) = gb.cwiseProduct(xb).sum();
            dbeta(c) = gb.sum();
            if (use_batch_stats) {
                // Standard batch-norm backward through the batch statistics.
                const double s1 = dbeta(c);
                const double s2 = dgamma(c);
                dx.middleCols(static_cast<Eigen::Index>(c) * spatial, spatial) =
                    ((gamma(0, c) * inv_std(c)) *
                     (gb.array() - s1 / m_count - xb.array() * (s2 / m_count)))
                        .matrix();
            } else {
                dx.middleCols(static_cast<Eigen::Index>(c) * spatial, spatial) =
                    gb * (gamma(0, c) * inv_std(c));
            }
        }
        t->accumulate(ix, dx);
        t->accumulate(ig, dgamma);
        t->accumulate(ib, dbeta);
    });
}

Var global_avg_pool2d(Var x, int channels) {
    Tape* t = x.tape();
    if (x.cols() % channels != 0)
        throw NumericError("global_avg_pool2d: cols not divisible by channels");
    const Eigen::Index spatial = x.cols() / channels;
    const bool ng = t->needs_grad(x);
    const int ix = x.index();
    const Mat& xv = x.value();
    Mat out(xv.rows(), channels);
    for (int c = 0; c < channels; ++c)
        out.col(c) = xv.middleCols(static_cast<Eigen::Index>(c) * spatial, spatial).rowwise().mean();
    return t->make(std::move(out), ng, [t, ix, spatial, channels](const Mat& g) {
        Mat dx(g.rows(), spatial * channels);
        const double inv = 1.0 / static_cast<double>(spatial);
        for (int c = 0; c < channels; ++c)
            dx.middleCols(static_cast<Eigen::Index>(c) * spatial, spatial) =
                (g.col(c) * inv).replicate(1, spatial);
        t->accumulate(ix, dx);
    });
}

} // namespace mrdf::ad
