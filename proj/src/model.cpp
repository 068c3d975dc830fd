#include "mrdf/model.hpp"

#include <sstream>

#include "mrdf/errors.hpp"

namespace mrdf {

void ModelConfig::validate() const {
    audio_encoder.validate();
    visual_encoder.validate();
    fusion.validate();
    if (proj_dim < 1) throw DataError("model: proj_dim must be >= 1");
}

Model::Model(ModelConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)),
      enc_audio_(cfg_.audio_encoder, "enc_a"),
      enc_visual_(cfg_.visual_encoder, "enc_v"),
      fusion_(cfg_.fusion, cfg_.audio_encoder.out_dim + cfg_.visual_encoder.out_dim) {
    cfg_.validate();
    Rng rng(seed);
    enc_audio_.init_params(store_, rng);
    enc_visual_.init_params(store_, rng);
    store_.add("proj_a.w", xavier_uniform(rng, cfg_.audio_encoder.out_dim, cfg_.proj_dim));
    store_.add("proj_a.b", Mat::Zero(1, cfg_.proj_dim));
    store_.add("proj_v.w", xavier_uniform(rng, cfg_.visual_encoder.out_dim, cfg_.proj_dim));
    store_.add("proj_v.b", Mat::Zero(1, cfg_.proj_dim));
    fusion_.init_params(store_, rng);
    store_.add("head_m.w", xavier_uniform(rng, cfg_.fusion.model_dim, 2));
    store_.add("head_m.b", Mat::Zero(1, 2));
    store_.add("head_a.w", xavier_uniform(rng, cfg_.proj_dim, 2));
    store_.add("head_a.b", Mat::Zero(1, 2));
    store_.add("head_v.w", xavier_uniform(rng, cfg_.proj_dim, 2));
    store_.add("head_v.b", Mat::Zero(1, 2));
}

Binding Model::bind(ad::Tape& tape, bool training, bool with_grad) {
    return mrdf::bind(store_, tape, training, with_grad);
}

ClipOutputs Model::forward_clip(const Binding& b, const AlignedClip& clip,
                                Rng* dropout_rng) const {
    if (clip.audio.rows() != clip.visual.rows())
        throw NumericError("model: audio/visual stream lengths differ (" +
                           std::to_string(clip.audio.rows()) + " vs " +
                           std::to_string(clip.visual.rows()) + ")");

    ClipOutputs out;
    ad::Var xa = b.tape->constant(clip.audio);
    ad::Var xv = b.tape->constant(clip.visual);
    out.frames_audio = enc_audio_.forward(b, xa);
    out.frames_visual = enc_visual_.forward(b, xv);

    out.pooled_audio = ad::mean_rows(out.frames_audio);
    out.pooled_visual = ad::mean_rows(out.frames_visual);
    out.emb_audio = ad::add_rowvec(ad::matmul(out.pooled_audio, b["proj_a.w"]), b["proj_a.b"]);
    out.emb_visual = ad::add_rowvec(ad::matmul(out.pooled_visual, b["proj_v.w"]), b["proj_v.b"]);

    out.fused = fusion_.forward(b, ad::concat_cols({out.frames_audio, out.frames_visual}),
                                dropout_rng);
    out.pooled_fused = ad::mean_rows(out.fused);
    out.logits = ad::add_rowvec(ad::matmul(out.pooled_fused, b["head_m.w"]), b["head_m.b"]);
    out.logits_audio = ad::add_rowvec(ad::matmul(out.emb_audio, b["head_a.w"]), b["head_a.b"]);
    out.logits_visual = ad::add_rowvec(ad::matmul(out.emb_visual, b["head_v.w"]), b["head_v.b"]);
    return out;
}

FeatureClip Model::extract_features(const AlignedClip& clip) {
    ad::Tape tape;
    Binding b = bind(tape, /*training=*/false, /*with_grad=*/false);
    ClipOutputs out = forward_clip(b, clip);
    FeatureClip fc;
    fc.audio = out.frames_audio.value();
    fc.visual = out.frames_visual.value();
    fc.pooled_audio = out.pooled_audio.value().row(0).transpose();
    fc.pooled_visual = out.pooled_visual.value().row(0).transpose();
    return fc;
}

BatchOutputs Model::forward_batch(const Binding& b, const std::vector<const AlignedClip*>& clips,
                                  Rng* dropout_rng) const {
    if (clips.empty()) throw NumericError("model: empty batch");
    BatchOutputs out;
    std::vector<ad::Var> ea, ev, lm, la, lv;
    for (const AlignedClip* clip : clips) {
        out.clips.push_back(forward_clip(b, *clip, dropout_rng));
        const ClipOutputs& c = out.clips.back();
        ea.push_back(c.emb_audio);
        ev.push_back(c.emb_visual);
        lm.push_back(c.logits);
        la.push_back(c.logits_audio);
        lv.push_back(c.logits_visual);
    }
    out.emb_audio = ad::concat_rows(ea);
    out.emb_visual = ad::concat_rows(ev);
    out.logits = ad::concat_rows(lm);
    out.logits_audio = ad::concat_rows(la);
    out.logits_visual = ad::concat_rows(lv);
    return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

std::string join_ints(const std::vector<int>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

std::vector<int> split_ints(const std::string& s) {
    std::vector<int> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ','))
        if (!tok.empty()) out.push_back(std::stoi(tok));
    return out;
}

void write_encoder_config(Checkpoint& ck, const std::string& key, const EncoderConfig& e) {
    ck.put_str(key + ".arch", encoder_arch_name(e.arch));
    ck.put_i64(key + ".out_dim", e.out_dim);
    ck.put_str(key + ".input_shape", join_ints(e.input_shape));
    ck.put_str(key + ".hidden_dims", join_ints(e.hidden_dims));
    ck.put_i64(key + ".base_channels", e.base_channels);
}

EncoderConfig read_encoder_config(const Checkpoint& ck, const std::string& key) {
    EncoderConfig e;
    e.arch = encoder_arch_from_name(ck.str(key + ".arch"));
    e.out_dim = static_cast<int>(ck.i64(key + ".out_dim"));
    e.input_shape = split_ints(ck.str(key + ".input_shape"));
    e.hidden_dims = split_ints(ck.str(key + ".hidden_dims"));
    e.base_channels = static_cast<int>(ck.i64(key + ".base_channels"));
    return e;
}

} // namespace

void write_model(Checkpoint& ck, const Model& model) {
    const ModelConfig& cfg = model.config();
    write_encoder_config(ck, "config.enc_a", cfg.audio_encoder);
    write_encoder_config(ck, "config.enc_v", cfg.visual_encoder);
    ck.put_i64("config.proj_dim", cfg.proj_dim);
    ck.put_i64("config.fusion.model_dim", cfg.fusion.model_dim);
    ck.put_i64("config.fusion.n_blocks", cfg.fusion.n_blocks);
    ck.put_i64("config.fusion.n_heads", cfg.fusion.n_heads);
    ck.put_i64("config.fusion.ff_dim", cfg.fusion.ff_dim);
    ck.put_f64("config.fusion.dropout", cfg.fusion.dropout);
    ck.put_i64("config.fusion.max_len", cfg.fusion.max_len);
    for (const auto& [name, m] : model.params().tensors()) ck.put_mat("param." + name, m);
}

ModelConfig model_config_from_checkpoint(const Checkpoint& ck) {
    ModelConfig cfg;
    cfg.audio_encoder = read_encoder_config(ck, "config.enc_a");
    cfg.visual_encoder = read_encoder_config(ck, "config.enc_v");
    cfg.proj_dim = static_cast<int>(ck.i64("config.proj_dim"));
    cfg.fusion.model_dim = static_cast<int>(ck.i64("config.fusion.model_dim"));
    cfg.fusion.n_blocks = static_cast<int>(ck.i64("config.fusion.n_blocks"));
    cfg.fusion.n_heads = static_cast<int>(ck.i64("config.fusion.n_heads"));
    cfg.fusion.ff_dim = static_cast<int>(ck.i64("config.fusion.ff_dim"));
    cfg.fusion.dropout = ck.f64("config.fusion.dropout");
    cfg.fusion.max_len = static_cast<int>(ck.i64("config.fusion.max_len"));
    return cfg;
}

void load_params_into(const Checkpoint& ck, Model& model) {
    for (auto& [name, m] : model.params().tensors()) {
        const Mat& stored = ck.mat("param." + name);
        if (stored.rows() != m.rows() || stored.cols() != m.cols())
            throw DataError("checkpoint shape mismatch for '" + name + "': file has " +
                            std::to_string(stored.rows()) + "x" + std::to_string(stored.cols()) +
                            ", model expects " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()));
        m = stored;
    }
}

Model model_from_checkpoint(const Checkpoint& ck) {
    Model model(model_config_from_checkpoint(ck), /*seed=*/0);
    load_params_into(ck, model);
    return model;
}

} // namespace mrdf
