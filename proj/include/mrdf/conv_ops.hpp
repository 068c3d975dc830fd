#pragma once

#include "mrdf/autodiff.hpp"

namespace mrdf::ad {

// Image stacks ride on the tape as one flattened row per frame, channel-major:
// element (c, y, x) sits at column c*H*W + y*W + x.
struct Conv2dMeta {
    int in_channels = 1;
    int in_h = 1;
    int in_w = 1;
    int out_channels = 1;
    int kh = 3;
    int kw = 3;
    int stride_h = 1;
    int stride_w = 1;
    int pad_h = 0;
    int pad_w = 0;

    int out_h() const { return (in_h + 2 * pad_h - kh) / stride_h + 1; }
    int out_w() const { return (in_w + 2 * pad_w - kw) / stride_w + 1; }
};

// x: [T x Cin*H*W], weight: [Cout x Cin*KH*KW], bias: [1 x Cout] (may be
// invalid Var for bias-free). Output: [T x Cout*OH*OW].
Var conv2d(Var x, Var weight, Var bias, const Conv2dMeta& meta);

// Batch statistics over all frames and spatial positions per channel.
// Training mode updates *running_mean / *running_var in place (single
// writer); eval mode normalizes with the stored running statistics.
Var batch_norm2d(Var x, Var gamma, Var beta, Mat* running_mean, Mat* running_var,
                 int channels, bool training, double momentum = 0.1, double eps = 1e-5);

// [T x C*H*W] -> [T x C], mean over spatial positions.
Var global_avg_pool2d(Var x, int channels);

} // namespace mrdf::ad
