#include "mrdf/fusion.hpp"

#include <cmath>

#include "mrdf/errors.hpp"

namespace mrdf {

void FusionConfig::validate() const {
    if (model_dim < 1) throw DataError("fusion: model_dim must be >= 1");
    if (n_blocks < 0) throw DataError("fusion: n_blocks must be >= 0");
    if (n_blocks > 0) {
        if (n_heads < 1) throw DataError("fusion: n_heads must be >= 1");
        if (model_dim % n_heads != 0)
            throw DataError("fusion: model_dim " + std::to_string(model_dim) +
                            " not divisible by n_heads " + std::to_string(n_heads));
        if (ff_dim < 1) throw DataError("fusion: ff_dim must be >= 1");
        if (max_len < 1) throw DataError("fusion: max_len must be >= 1");
    }
    if (dropout < 0.0 || dropout >= 1.0) throw DataError("fusion: dropout must be in [0, 1)");
}

FusionTransformer::FusionTransformer(FusionConfig cfg, int in_dim, std::string prefix)
    : cfg_(cfg), in_dim_(in_dim), prefix_(std::move(prefix)) {
    cfg_.validate();
    if (in_dim_ < 1) throw DataError("fusion: input dim must be >= 1");
}

void FusionTransformer::init_params(ParamStore& store, Rng& rng) const {
    store.add(prefix_ + ".proj.w", xavier_uniform(rng, in_dim_, cfg_.model_dim));
    store.add(prefix_ + ".proj.b", Mat::Zero(1, cfg_.model_dim));
    if (cfg_.n_blocks == 0) return;

    Mat pos(cfg_.max_len, cfg_.model_dim);
    for (Eigen::Index i = 0; i < pos.size(); ++i) pos(i) = rng.gaussian(0.0, 0.02);
    store.add(prefix_ + ".pos", std::move(pos));

    for (int i = 0; i < cfg_.n_blocks; ++i) {
        const std::string blk = prefix_ + ".blk" + std::to_string(i);
        store.add(blk + ".ln1.g", Mat::Ones(1, cfg_.model_dim));
        store.add(blk + ".ln1.b", Mat::Zero(1, cfg_.model_dim));
        for (const char* nm : {".attn.wq", ".attn.wk", ".attn.wv", ".attn.wo"})
            store.add(blk + nm, xavier_uniform(rng, cfg_.model_dim, cfg_.model_dim));
        for (const char* nm : {".attn.bq", ".attn.bk", ".attn.bv", ".attn.bo"})
            store.add(blk + nm, Mat::Zero(1, cfg_.model_dim));
        store.add(blk + ".ln2.g", Mat::Ones(1, cfg_.model_dim));
        store.add(blk + ".ln2.b", Mat::Zero(1, cfg_.model_dim));
        store.add(blk + ".ff.w1", xavier_uniform(rng, cfg_.model_dim, cfg_.ff_dim));
        store.add(blk + ".ff.b1", Mat::Zero(1, cfg_.ff_dim));
        store.add(blk + ".ff.w2", xavier_uniform(rng, cfg_.ff_dim, cfg_.model_dim));
        store.add(blk + ".ff.b2", Mat::Zero(1, cfg_.model_dim));
    }
    store.add(prefix_ + ".lnf.g", Mat::Ones(1, cfg_.model_dim));
    store.add(prefix_ + ".lnf.b", Mat::Zero(1, cfg_.model_dim));
}

ad::Var FusionTransformer::attention(const Binding& b, ad::Var x, const std::string& blk) const {
    const int head_dim = cfg_.model_dim / cfg_.n_heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

    ad::Var q = ad::add_rowvec(ad::matmul(x, b[blk + ".attn.wq"]), b[blk + ".attn.bq"]);
    ad::Var k = ad::add_rowvec(ad::matmul(x, b[blk + ".attn.wk"]), b[blk + ".attn.bk"]);
    ad::Var v = ad::add_rowvec(ad::matmul(x, b[blk + ".attn.wv"]), b[blk + ".attn.bv"]);

    std::vector<ad::Var> heads;
    heads.reserve(static_cast<std::size_t>(cfg_.n_heads));
    for (int h = 0; h < cfg_.n_heads; ++h) {
        const Eigen::Index off = static_cast<Eigen::Index>(h) * head_dim;
        ad::Var qh = ad::slice_cols(q, off, head_dim);
        ad::Var kh = ad::slice_cols(k, off, head_dim);
        ad::Var vh = ad::slice_cols(v, off, head_dim);
        ad::Var scores = ad::scalar_mul(ad::matmul(qh, ad::transpose(kh)), scale);
        ad::Var attn = ad::row_softmax(scores);
        heads.push_back(ad::matmul(attn, vh));
    }
    ad::Var merged = cfg_.n_heads == 1 ? heads[0] : ad::concat_cols(heads);
    return ad::add_rowvec(ad::matmul(merged, b[blk + ".attn.wo"]), b[blk + ".attn.bo"]);
}

ad::Var FusionTransformer::forward(const Binding& b, ad::Var concat_features,
                                   Rng* dropout_rng) const {
    if (concat_features.cols() != in_dim_)
        throw NumericError("fusion: input dim " + std::to_string(concat_features.cols()) +
                           " does not match configured " + std::to_string(in_dim_));
    ad::Var x = ad::add_rowvec(ad::matmul(concat_features, b[prefix_ + ".proj.w"]),
                               b[prefix_ + ".proj.b"]);
    if (cfg_.n_blocks == 0) return x;

    const Eigen::Index t_len = x.rows();
    if (t_len > cfg_.max_len)
        throw NumericError("fusion: sequence length " + std::to_string(t_len) +
                           " exceeds max_len " + std::to_string(cfg_.max_len));
    x = ad::add(x, ad::slice_rows(b[prefix_ + ".pos"], 0, t_len));

    const bool use_dropout = b.training && cfg_.dropout > 0.0;
    if (use_dropout && !dropout_rng)
        throw NumericError("fusion: dropout enabled but no rng provided");

    for (int i = 0; i < cfg_.n_blocks; ++i) {
        const std::string blk = prefix_ + ".blk" + std::to_string(i);
        ad::Var h = attention(b, ad::layer_norm_rows(x, b[blk + ".ln1.g"], b[blk + ".ln1.b"]), blk);
        if (use_dropout) h = ad::dropout(h, cfg_.dropout, *dropout_rng, true);
        x = ad::add(x, h);
        ad::Var f = ad::layer_norm_rows(x, b[blk + ".ln2.g"], b[blk + ".ln2.b"]);
        f = ad::add_rowvec(ad::matmul(f, b[blk + ".ff.w1"]), b[blk + ".ff.b1"]);
        f = ad::gelu(f);
        f = ad::add_rowvec(ad::matmul(f, b[blk + ".ff.w2"]), b[blk + ".ff.b2"]);
        if (use_dropout) f = ad::dropout(f, cfg_.dropout, *dropout_rng, true);
        x = ad::add(x, f);
    }
    return ad::layer_norm_rows(x, b[prefix_ + ".lnf.g"], b[prefix_ + ".lnf.b"]);
}

} // namespace mrdf
