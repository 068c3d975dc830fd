#pragma once

#include <string>
#include <vector>

#include "mrdf/conv_ops.hpp"
#include "mrdf/params.hpp"

namespace mrdf {

enum class EncoderArch { SmallMlp, Resnet18Style };

const char* encoder_arch_name(EncoderArch a);
EncoderArch encoder_arch_from_name(const std::string& name);

struct EncoderConfig {
    EncoderArch arch = EncoderArch::Resnet18Style;
    int out_dim = 512;
    // {d} for vector frames; {h, w, c} for image frames (rows are flattened
    // channel-major: column index = c*h*w + y*w + x).
    std::vector<int> input_shape;
    // small_mlp: hidden layer widths; empty means a single linear layer.
    std::vector<int> hidden_dims = {64};
    // resnet18_style: stage widths are {1,2,4,8} * base_channels.
    int base_channels = 64;

    int input_dim() const; // flattened row width
    void validate() const;
};

// Frame-level unimodal feature extractor: [T x d_in] -> [T x out_dim], applied
// to every frame independently (batch norm aside, which pools statistics over
// the frames it sees in training mode).
class Encoder {
public:
    Encoder(EncoderConfig cfg, std::string prefix);

    void init_params(ParamStore& store, Rng& rng) const;
    ad::Var forward(const Binding& b, ad::Var frames) const;

    const EncoderConfig& config() const { return cfg_; }

private:
    struct BlockSpec {
        std::string name;
        ad::Conv2dMeta conv1, conv2;
        ad::Conv2dMeta down; // 1x1 projection when shape changes
        bool has_down = false;
    };

    ad::Var forward_mlp(const Binding& b, ad::Var frames) const;
    ad::Var forward_resnet(const Binding& b, ad::Var frames) const;

    EncoderConfig cfg_;
    std::string prefix_;
    ad::Conv2dMeta stem_;
    std::vector<BlockSpec> blocks_;
    int gap_channels_ = 0;
};

} // namespace mrdf
