#pragma once

#include <string>

#include "mrdf/params.hpp"

namespace mrdf {

struct FusionConfig {
    int model_dim = 768;
    int n_blocks = 12;
    int n_heads = 12;
    int ff_dim = 3072;
    double dropout = 0.0;
    int max_len = 1024; // learned absolute positions

    void validate() const; // model_dim divisible by n_heads, etc.
};

// Projection of the concatenated unimodal frame features into model_dim,
// followed by a pre-norm self-attention transformer stack with learned
// positional embeddings. n_blocks == 0 reduces to the projection alone.
class FusionTransformer {
public:
    FusionTransformer(FusionConfig cfg, int in_dim, std::string prefix = "fusion");

    void init_params(ParamStore& store, Rng& rng) const;

    // concat_features: [T x in_dim] -> [T x model_dim]. dropout_rng may be
    // null when not training or dropout == 0.
    ad::Var forward(const Binding& b, ad::Var concat_features, Rng* dropout_rng) const;

    const FusionConfig& config() const { return cfg_; }

private:
    ad::Var attention(const Binding& b, ad::Var x, const std::string& blk) const;

    FusionConfig cfg_;
    int in_dim_;
    std::string prefix_;
};

} // namespace mrdf
