#include "mrdf/encoders.hpp"

#include "mrdf/errors.hpp"

namespace mrdf {

const char* encoder_arch_name(EncoderArch a) {
    return a == EncoderArch::SmallMlp ? "small_mlp" : "resnet18_style";
}

EncoderArch encoder_arch_from_name(const std::string& name) {
    if (name == "small_mlp") return EncoderArch::SmallMlp;
    if (name == "resnet18_style") return EncoderArch::Resnet18Style;
    throw DataError("unknown encoder arch '" + name + "'");
}

int EncoderConfig::input_dim() const {
    int d = 1;
    for (int v : input_shape) d *= v;
    return d;
}

void EncoderConfig::validate() const {
    if (out_dim < 1) throw DataError("encoder: out_dim must be >= 1");
    if (input_shape.empty() || (input_shape.size() != 1 && input_shape.size() != 3))
        throw DataError("encoder: input_shape must be {d} or {h, w, c}");
    for (int v : input_shape)
        if (v < 1) throw DataError("encoder: input_shape entries must be >= 1");
    if (arch == EncoderArch::SmallMlp)
        for (int h : hidden_dims)
            if (h < 1) throw DataError("encoder: hidden_dims entries must be >= 1");
    if (arch == EncoderArch::Resnet18Style && base_channels < 1)
        throw DataError("encoder: base_channels must be >= 1");
}

namespace {

ad::Conv2dMeta make_meta(int cin, int h, int w, int cout, int k, int stride, int pad) {
    ad::Conv2dMeta m;
    m.in_channels = cin;
    m.in_h = h;
    m.in_w = w;
    m.out_channels = cout;
    m.kh = h > 1 ? k : 1;
    m.kw = k;
    m.stride_h = h > 1 ? stride : 1;
    m.stride_w = stride;
    m.pad_h = h > 1 ? pad : 0;
    m.pad_w = pad;
    return m;
}

} // namespace

Encoder::Encoder(EncoderConfig cfg, std::string prefix)
    : cfg_(std::move(cfg)), prefix_(std::move(prefix)) {
    cfg_.validate();
    if (cfg_.arch != EncoderArch::Resnet18Style) return;

    int c, h, w;
    if (cfg_.input_shape.size() == 3) {
        h = cfg_.input_shape[0];
        w = cfg_.input_shape[1];
        c = cfg_.input_shape[2];
    } else {
        h = 1;
        w = cfg_.input_shape[0];
        c = 1;
    }

    // Stem adapted to the input scale: full 7x7/2 stem for large inputs,
    // 3x3/1 for small ones.
    const int spatial = std::max(h, w);
    stem_ = spatial >= 64 ? make_meta(c, h, w, cfg_.base_channels, 7, 2, 3)
                          : make_meta(c, h, w, cfg_.base_channels, 3, 1, 1);
    h = stem_.out_h();
    w = stem_.out_w();

    int in_ch = cfg_.base_channels;
    for (int stage = 0; stage < 4; ++stage) {
        const int out_ch = cfg_.base_channels << stage;
        for (int block = 0; block < 2; ++block) {
            const int stride = (stage > 0 && block == 0) ? 2 : 1;
            BlockSpec spec;
            spec.name = prefix_ + ".s" + std::to_string(stage + 1) + ".b" + std::to_string(block);
            spec.conv1 = make_meta(in_ch, h, w, out_ch, 3, stride, 1);
            const int h2 = spec.conv1.out_h(), w2 = spec.conv1.out_w();
            spec.conv2 = make_meta(out_ch, h2, w2, out_ch, 3, 1, 1);
            if (stride != 1 || in_ch != out_ch) {
                spec.down = make_meta(in_ch, h, w, out_ch, 1, stride, 0);
                spec.has_down = true;
            }
            blocks_.push_back(spec);
            in_ch = out_ch;
            h = h2;
            w = w2;
        }
    }
    gap_channels_ = in_ch;
}

void Encoder::init_params(ParamStore& store, Rng& rng) const {
    if (cfg_.arch == EncoderArch::SmallMlp) {
        std::vector<int> dims = {cfg_.input_dim()};
        dims.insert(dims.end(), cfg_.hidden_dims.begin(), cfg_.hidden_dims.end());
        dims.push_back(cfg_.out_dim);
        for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
            const std::string l = prefix_ + ".l" + std::to_string(i);
            store.add(l + ".w", xavier_uniform(rng, dims[i], dims[i + 1]));
            store.add(l + ".b", Mat::Zero(1, dims[i + 1]));
        }
        return;
    }

    auto add_conv = [&](const std::string& name, const ad::Conv2dMeta& m) {
        const Eigen::Index fan_in = static_cast<Eigen::Index>(m.in_channels) * m.kh * m.kw;
        store.add(name + ".w", he_normal(rng, m.out_channels, fan_in, fan_in));
    };
    auto add_bn = [&](const std::string& name, int ch) {
        store.add(name + ".g", Mat::Ones(1, ch));
        store.add(name + ".b", Mat::Zero(1, ch));
        store.add(name + ".rm", Mat::Zero(1, ch), /*buffer=*/true);
        store.add(name + ".rv", Mat::Ones(1, ch), /*buffer=*/true);
    };

    add_conv(prefix_ + ".stem.conv", stem_);
    add_bn(prefix_ + ".stem.bn", stem_.out_channels);
    for (const auto& b : blocks_) {
        add_conv(b.name + ".conv1", b.conv1);
        add_bn(b.name + ".bn1", b.conv1.out_channels);
        add_conv(b.name + ".conv2", b.conv2);
        add_bn(b.name + ".bn2", b.conv2.out_channels);
        if (b.has_down) {
            add_conv(b.name + ".down", b.down);
            add_bn(b.name + ".dbn", b.down.out_channels);
        }
    }
    store.add(prefix_ + ".fc.w", xavier_uniform(rng, gap_channels_, cfg_.out_dim));
    store.add(prefix_ + ".fc.b", Mat::Zero(1, cfg_.out_dim));
}

ad::Var Encoder::forward(const Binding& b, ad::Var frames) const {
    if (frames.cols() != cfg_.input_dim())
        throw NumericError("encoder " + prefix_ + ": frame dim " + std::to_string(frames.cols()) +
                           " does not match configured input dim " +
                           std::to_string(cfg_.input_dim()));
    if (frames.rows() < 1) throw NumericError("encoder " + prefix_ + ": empty frame sequence");
    return cfg_.arch == EncoderArch::SmallMlp ? forward_mlp(b, frames) : forward_resnet(b, frames);
}

ad::Var Encoder::forward_mlp(const Binding& b, ad::Var frames) const {
    ad::Var x = frames;
    const std::size_t n_layers = cfg_.hidden_dims.size() + 1;
    for (std::size_t i = 0; i < n_layers; ++i) {
        const std::string l = prefix_ + ".l" + std::to_string(i);
        x = ad::add_rowvec(ad::matmul(x, b[l + ".w"]), b[l + ".b"]);
        if (i + 1 < n_layers) x = ad::relu(x);
    }
    return x;
}

ad::Var Encoder::forward_resnet(const Binding& b, ad::Var frames) const {
    auto conv = [&](ad::Var x, const std::string& name, const ad::Conv2dMeta& m) {
        return ad::conv2d(x, b[name + ".w"], ad::Var(), m);
    };
    auto bn = [&](ad::Var x, const std::string& name, int ch) {
        return ad::batch_norm2d(x, b[name + ".g"], b[name + ".b"], &b.store->at(name + ".rm"),
                                &b.store->at(name + ".rv"), ch, b.training);
    };

    ad::Var x = ad::relu(bn(conv(frames, prefix_ + ".stem.conv", stem_), prefix_ + ".stem.bn",
                            stem_.out_channels));
    for (const auto& blk : blocks_) {
        ad::Var y = ad::relu(bn(conv(x, blk.name + ".conv1", blk.conv1), blk.name + ".bn1",
                                blk.conv1.out_channels));
        y = bn(conv(y, blk.name + ".conv2", blk.conv2), blk.name + ".bn2", blk.conv2.out_channels);
        ad::Var skip = blk.has_down ? bn(conv(x, blk.name + ".down", blk.down), blk.name + ".dbn",
                                         blk.down.out_channels)
                                    : x;
        x = ad::relu(ad::add(y, skip));
    }
    x = ad::global_avg_pool2d(x, gap_channels_);
    return ad::add_rowvec(ad::matmul(x, b[prefix_ + ".fc.w"]), b[prefix_ + ".fc.b"]);
}

} // namespace mrdf
