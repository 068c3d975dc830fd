#pragma once

#include <vector>

#include "mrdf/checkpoint.hpp"
#include "mrdf/encoders.hpp"
#include "mrdf/frontend.hpp"
#include "mrdf/fusion.hpp"

namespace mrdf {

struct ModelConfig {
    EncoderConfig audio_encoder;
    EncoderConfig visual_encoder;
    // Shared embedding width of the unimodal projectors; the pairing loss and
    // the unimodal heads act in this space, so both modalities project here.
    int proj_dim = 256;
    FusionConfig fusion;

    void validate() const;
};

// Everything the losses and metrics need from one clip's forward pass.
struct ClipOutputs {
    ad::Var frames_audio;  // [T x D_a]
    ad::Var frames_visual; // [T x D_v]
    ad::Var pooled_audio;  // [1 x D_a]  temporal means, pre-projection
    ad::Var pooled_visual; // [1 x D_v]
    ad::Var emb_audio;     // [1 x proj_dim] projected clip embeddings
    ad::Var emb_visual;    // [1 x proj_dim]
    ad::Var fused;         // [T x model_dim]
    ad::Var pooled_fused;  // [1 x model_dim]
    ad::Var logits;        // [1 x 2] deepfake head on fused features
    ad::Var logits_audio;  // [1 x 2] unimodal heads on projected embeddings
    ad::Var logits_visual; // [1 x 2]
};

struct BatchOutputs {
    std::vector<ClipOutputs> clips;
    ad::Var emb_audio;     // [B x proj_dim]
    ad::Var emb_visual;    // [B x proj_dim]
    ad::Var logits;        // [B x 2]
    ad::Var logits_audio;  // [B x 2]
    ad::Var logits_visual; // [B x 2]
};

// Unimodal encoders, projectors into the shared space, concatenation fusion
// through the transformer, and the three classifier heads, over one shared
// parameter store.
class Model {
public:
    Model(ModelConfig cfg, std::uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }

    Binding bind(ad::Tape& tape, bool training, bool with_grad);

    ClipOutputs forward_clip(const Binding& b, const AlignedClip& clip,
                             Rng* dropout_rng = nullptr) const;
    BatchOutputs forward_batch(const Binding& b, const std::vector<const AlignedClip*>& clips,
                               Rng* dropout_rng = nullptr) const;

    // Inference-mode encoder features for one clip, as plain data.
    FeatureClip extract_features(const AlignedClip& clip);

private:
    ModelConfig cfg_;
    Encoder enc_audio_;
    Encoder enc_visual_;
    FusionTransformer fusion_;
    ParamStore store_;
};

// Model (de)serialization. The checkpoint stores the full ModelConfig, so a
// model can be rebuilt from the file alone; loading into an existing store
// validates every tensor shape.
void write_model(Checkpoint& ck, const Model& model);
ModelConfig model_config_from_checkpoint(const Checkpoint& ck);
Model model_from_checkpoint(const Checkpoint& ck);
void load_params_into(const Checkpoint& ck, Model& model);

} // namespace mrdf
