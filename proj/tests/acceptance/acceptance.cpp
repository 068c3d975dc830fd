// Acceptance suite: every release-gating property in one binary, one
// PASS/FAIL line per criterion. Exits nonzero if any criterion fails.
//
//  C1  loss implementations match naive-loop oracles (1e-9, 100 batches)
//  C2  loss gradients match central finite differences (1e-4, 20 instances)
//  C3  AUC matches the O(N^2) pairwise oracle (1e-12, 50 sets)
//  C4  label algebra truth table, exhaustive
//  C5  split/sampling protocol properties over 200 random manifests
//  C6  zero-weight regularizers reproduce the baseline objective per step
//  C7  synthetic end-to-end: regularization improves detection
//  C8  determinism of every pipeline stage under fixed seeds

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mrdf/crossval.hpp"
#include "mrdf/selfcheck.hpp"
#include "mrdf/synthetic.hpp"
#include "mrdf/trainer.hpp"
#include "mrdf/viz.hpp"

using namespace mrdf;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(const std::string& name, bool passed, const std::string& detail, double elapsed) {
    std::ostringstream os;
    os << (passed ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) os << " — " << detail;
    os << " (" << std::fixed;
    os.precision(1);
    os << elapsed << " s)";
    std::cout << os.str() << std::endl;
    if (!passed) ++failures;
}

void run_selfcheck(const std::string& label, selfcheck::Result (*fn)(), double budget_s) {
    const auto t0 = Clock::now();
    const selfcheck::Result r = fn();
    const double dt = seconds_since(t0);
    const bool in_budget = budget_s <= 0.0 || dt < budget_s;
    report(label, r.passed && in_budget,
           r.detail + (in_budget ? "" : " [over time budget]"), dt);
}

// ---------------------------------------------------------------------------

ModelConfig tiny_model_config(int d_in, int encoder_width = 64) {
    ModelConfig cfg;
    cfg.audio_encoder.arch = EncoderArch::SmallMlp;
    cfg.audio_encoder.out_dim = encoder_width;
    cfg.audio_encoder.input_shape = {d_in};
    cfg.audio_encoder.hidden_dims = {encoder_width};
    cfg.visual_encoder = cfg.audio_encoder;
    cfg.proj_dim = 32;
    cfg.fusion.model_dim = 64;
    cfg.fusion.n_blocks = 2;
    cfg.fusion.n_heads = 4;
    cfg.fusion.ff_dim = 128;
    cfg.fusion.max_len = 32;
    return cfg;
}

TrainConfig experiment_train_config(loss::Variant variant, std::uint64_t seed) {
    TrainConfig tc;
    tc.epochs = 10;
    tc.batch_size = 16;
    tc.lr = 1e-3;
    tc.seed = seed;
    tc.variant = variant;
    tc.val_fraction = 0.1;
    return tc;
}

void criterion6(const std::string& work_dir) {
    const auto t0 = Clock::now();
    bool passed = true;
    std::string detail;
    try {
        SynthSpec spec;
        spec.n_identities = 6;
        spec.clips_per_category = 12;
        spec.frames = 4;
        spec.latent_dim = 8;
        spec.noise_scale = 0.3;
        spec.manipulation_shift = 1.0;
        spec.seed = 6;
        const std::string dir = work_dir + "/c6";
        Manifest m = generate_synthetic(spec, dir);
        auto clips = load_all_clips(m, 1);

        TrainConfig base_cfg;
        base_cfg.epochs = 3;
        base_cfg.batch_size = 8;
        base_cfg.seed = 11;
        base_cfg.variant = loss::Variant::Baseline;
        base_cfg.val_fraction = 0.0;

        TrainConfig zero_cfg = base_cfg;
        zero_cfg.variant = loss::Variant::CrossEntropy;
        zero_cfg.weights.cmr = 0.0;
        zero_cfg.weights.wmr = 0.0;

        Model m1(tiny_model_config(spec.latent_dim), 17);
        Model m2(tiny_model_config(spec.latent_dim), 17);
        TrainResult a = train_model(m1, clips, {}, base_cfg, "");
        TrainResult b = train_model(m2, clips, {}, zero_cfg, "");

        double worst = 0.0;
        passed = a.state.step_log.size() == b.state.step_log.size() &&
                 !a.state.step_log.empty();
        if (passed)
            for (std::size_t i = 0; i < a.state.step_log.size(); ++i)
                worst = std::max(worst, std::abs(a.state.step_log[i].total -
                                                 b.state.step_log[i].total));
        passed = passed && worst < 1e-9;
        std::ostringstream os;
        os << "worst per-step total gap = " << worst << " over 3 epochs";
        detail = os.str();
    } catch (const std::exception& e) {
        passed = false;
        detail = e.what();
    }
    report("C6 degenerate-weight-equivalence", passed, detail, seconds_since(t0));
}

struct ExperimentOutcome {
    double auc_baseline = 0.0, auc_ce = 0.0, auc_margin = 0.0;
    double rafv_baseline = 0.0, rafv_ce = 0.0, rafv_margin = 0.0;
    double cos_gap_ce = 0.0, cos_gap_margin = 0.0;
};

double pooled_manipulated_cosine(const CrossValReport& r) {
    double cos_sum = 0.0;
    long count = 0;
    for (const auto& fold : r.per_fold) {
        for (Category c : {Category::FAFV, Category::FARV, Category::RAFV}) {
            const auto ci = static_cast<std::size_t>(category_index(c));
            if (fold.per_category_count[ci] > 0 && std::isfinite(fold.mean_pair_cosine[ci])) {
                cos_sum += fold.mean_pair_cosine[ci] *
                           static_cast<double>(fold.per_category_count[ci]);
                count += fold.per_category_count[ci];
            }
        }
    }
    return cos_sum / static_cast<double>(count);
}

double pooled_rarv_cosine(const CrossValReport& r) {
    double cos_sum = 0.0;
    long count = 0;
    const auto ci = static_cast<std::size_t>(category_index(Category::RARV));
    for (const auto& fold : r.per_fold) {
        if (fold.per_category_count[ci] > 0 && std::isfinite(fold.mean_pair_cosine[ci])) {
            cos_sum +=
                fold.mean_pair_cosine[ci] * static_cast<double>(fold.per_category_count[ci]);
            count += fold.per_category_count[ci];
        }
    }
    return cos_sum / static_cast<double>(count);
}

void criterion7(const std::string& work_dir) {
    const auto t0 = Clock::now();
    bool passed = true;
    std::ostringstream detail;
    try {
        // Synthetic data pinned to seed 7. Noise, shifts and trajectory
        // statistics are tuned so the baseline lands inside the 0.75-0.95
        // AUC band at this model scale while leaving the modality-specific
        // and pairing signals sample-limited — the regime where the extra
        // supervision of the regularizers pays off.
        SynthSpec spec;
        spec.n_identities = 10;
        spec.clips_per_category = 80;
        spec.frames = 8;
        spec.latent_dim = 16;
        spec.noise_scale = 1.0;
        spec.manipulation_shift = 0.45;
        spec.visual_shift_scale = 0.3;
        spec.identity_scale = 0.0;
        spec.frame_jitter = 0.4;
        spec.seed = 7;
        const std::string dir = work_dir + "/c7";
        Manifest manifest = generate_synthetic(spec, dir);
        auto clips = load_all_clips(manifest, 1);
        const ModelConfig mc = tiny_model_config(spec.latent_dim, 48);
        const std::uint64_t fold_seed = 7;
        const int k = 5;

        detail.precision(3);
        detail << std::fixed;
        double rafv_base_mean = 0.0, rafv_ce_mean = 0.0, rafv_margin_mean = 0.0;
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
            ExperimentOutcome out;
            CrossValReport base = cross_validate(
                manifest, clips, mc, experiment_train_config(loss::Variant::Baseline, seed), k,
                fold_seed, "");
            CrossValReport ce = cross_validate(
                manifest, clips, mc, experiment_train_config(loss::Variant::CrossEntropy, seed),
                k, fold_seed, "");
            CrossValReport margin = cross_validate(
                manifest, clips, mc, experiment_train_config(loss::Variant::Margin, seed), k,
                fold_seed, "");

            out.auc_baseline = base.mean.auc;
            out.auc_ce = ce.mean.auc;
            out.auc_margin = margin.mean.auc;
            const auto rafv = static_cast<std::size_t>(category_index(Category::RAFV));
            out.rafv_baseline = base.mean.per_category_accuracy[rafv];
            out.rafv_ce = ce.mean.per_category_accuracy[rafv];
            out.rafv_margin = margin.mean.per_category_accuracy[rafv];
            out.cos_gap_ce = pooled_rarv_cosine(ce) - pooled_manipulated_cosine(ce);
            out.cos_gap_margin = pooled_rarv_cosine(margin) - pooled_manipulated_cosine(margin);
            rafv_base_mean += out.rafv_baseline / 3.0;
            rafv_ce_mean += out.rafv_ce / 3.0;
            rafv_margin_mean += out.rafv_margin / 3.0;

            // (a) per seed: both regularized variants beat the baseline AUC
            // by at least 0.01 absolute, with the baseline inside the band.
            // (b) pairing geometry: RARV pair-cosine exceeds the manipulated
            // clips' by at least 0.2 after training with the pairing loss.
            const bool band_ok = out.auc_baseline >= 0.75 && out.auc_baseline <= 0.95;
            const bool auc_ok = out.auc_ce >= out.auc_baseline + 0.01 &&
                                out.auc_margin >= out.auc_baseline + 0.01;
            const bool cos_ok = out.cos_gap_ce >= 0.2 && out.cos_gap_margin >= 0.2;
            passed = passed && band_ok && auc_ok && cos_ok;

            detail << "[seed " << seed << ": auc " << out.auc_baseline << "/" << out.auc_ce
                   << "/" << out.auc_margin << (band_ok ? "" : " BAND!")
                   << (auc_ok ? "" : " AUC!") << ", rafv " << out.rafv_baseline << "->"
                   << out.rafv_ce << "/" << out.rafv_margin << ", cos-gap " << out.cos_gap_ce
                   << "/" << out.cos_gap_margin << (cos_ok ? "" : " COS!") << "] ";
        }
        // (c) over the seed means: fake-video-only accuracy improves under
        // both regularized variants.
        const bool rafv_ok =
            rafv_ce_mean > rafv_base_mean && rafv_margin_mean > rafv_base_mean;
        passed = passed && rafv_ok;
        detail << "rafv-mean " << rafv_base_mean << "->" << rafv_ce_mean << "/"
               << rafv_margin_mean << (rafv_ok ? "" : " RAFV!");
    } catch (const std::exception& e) {
        passed = false;
        detail << e.what();
    }
    const double dt = seconds_since(t0);
    const bool in_budget = dt < 600.0;
    report("C7 synthetic-end-to-end", passed && in_budget,
           detail.str() + (in_budget ? "" : "[over 10 min budget]"), dt);
}

std::string file_bytes(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void criterion8(const std::string& work_dir) {
    const auto t0 = Clock::now();
    bool passed = true;
    std::string detail = "synth bytes, train history, eval metrics, projection coords all stable";
    try {
        SynthSpec spec;
        spec.n_identities = 5;
        spec.clips_per_category = 10;
        spec.frames = 4;
        spec.latent_dim = 6;
        spec.noise_scale = 0.3;
        spec.manipulation_shift = 1.0;
        spec.seed = 21;
        const std::string d1 = work_dir + "/c8_a", d2 = work_dir + "/c8_b";
        Manifest m1 = generate_synthetic(spec, d1);
        Manifest m2 = generate_synthetic(spec, d2);
        for (std::size_t i = 0; i < m1.samples.size() && passed; ++i) {
            passed = file_bytes(d1 + "/" + m1.samples[i].audio_ref) ==
                         file_bytes(d2 + "/" + m2.samples[i].audio_ref) &&
                     file_bytes(d1 + "/" + m1.samples[i].visual_ref) ==
                         file_bytes(d2 + "/" + m2.samples[i].visual_ref);
        }
        if (!passed) detail = "synthetic feature files differ between identical seeds";

        auto clips = load_all_clips(m1, 1);
        ModelConfig mc = tiny_model_config(spec.latent_dim);
        TrainConfig tc;
        tc.epochs = 2;
        tc.batch_size = 8;
        tc.seed = 5;
        tc.variant = loss::Variant::CrossEntropy;
        tc.val_fraction = 0.0;

        Model mdl1(mc, tc.seed), mdl2(mc, tc.seed);
        TrainResult r1 = train_model(mdl1, clips, {}, tc, "");
        TrainResult r2 = train_model(mdl2, clips, {}, tc, "");
        for (std::size_t i = 0; i < r1.state.step_log.size() && passed; ++i)
            passed = r1.state.step_log[i].total == r2.state.step_log[i].total;
        if (!passed) detail = "training histories differ between identical seeds";

        EvalReport e1 = evaluate(mdl1, clips);
        EvalReport e2 = evaluate(mdl2, clips);
        if (passed && (e1.auc != e2.auc || e1.accuracy != e2.accuracy)) {
            passed = false;
            detail = "evaluation metrics differ between identical runs";
        }

        EmbeddingDump dump = dump_embeddings(mdl1, clips, EmbeddingStage::PreFusionAudio);
        TsneConfig tcfg;
        tcfg.perplexity = 8.0;
        tcfg.seed = 4;
        const Mat p1 = tsne_2d(dump.vectors, tcfg);
        const Mat p2 = tsne_2d(dump.vectors, tcfg);
        if (passed && (p1 - p2).cwiseAbs().maxCoeff() != 0.0) {
            passed = false;
            detail = "t-SNE coordinates differ between identical seeds";
        }
    } catch (const std::exception& e) {
        passed = false;
        detail = e.what();
    }
    report("C8 determinism", passed, detail, seconds_since(t0));
}

} // namespace

int main() {
    const std::string work_dir =
        (fs::temp_directory_path() / ("mrdf_acceptance_" + std::to_string(::getpid()))).string();
    fs::create_directories(work_dir);

    run_selfcheck("C1 loss-oracle-equivalence", [] { return selfcheck::check_loss_oracles(); },
                  10.0);
    run_selfcheck("C2 loss-gradient-checks", [] { return selfcheck::check_loss_gradients(); },
                  30.0);
    run_selfcheck("C3 auc-oracle", [] { return selfcheck::check_auc_oracle(); }, 10.0);
    run_selfcheck("C4 label-algebra", [] { return selfcheck::check_label_algebra(); }, 0.0);
    run_selfcheck("C5 protocol-properties",
                  [] { return selfcheck::check_protocol_properties(); }, 0.0);
    criterion6(work_dir);
    criterion7(work_dir);
    criterion8(work_dir);

    std::error_code ec;
    fs::remove_all(work_dir, ec);

    if (failures) {
        std::cout << failures << " acceptance criteria failed" << std::endl;
        return 1;
    }
    std::cout << "all acceptance criteria passed" << std::endl;
    return 0;
}
