// Command-line entry point for the audio-visual deepfake detection toolkit:
// synthetic data generation, manifest inspection, identity-disjoint splits,
// training, evaluation, cross-validation, embedding visualization, and the
// numeric self-test suite.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "mrdf/clips.hpp"
#include "mrdf/config.hpp"
#include "mrdf/crossval.hpp"
#include "mrdf/errors.hpp"
#include "mrdf/selfcheck.hpp"
#include "mrdf/synthetic.hpp"
#include "mrdf/viz.hpp"

namespace fs = std::filesystem;
using namespace mrdf;

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Config file (key = value lines)");
    cmd->add_option("--set", opts.overrides, "Config override key=value (repeatable)");
}

Manifest load_data_manifest(const std::string& data_dir, const std::string& manifest_path) {
    if (!manifest_path.empty()) return load_manifest(manifest_path);
    return load_manifest((fs::path(data_dir) / "manifest.tsv").string());
}

// Synthetic feature files are written frame-aligned, so data directories
// produced by `synth` carry a ratio-1 frontend hint alongside the manifest.
Config config_for_data(const CommonOpts& opts, const std::string& data_dir) {
    Config cfg;
    if (!data_dir.empty()) {
        const fs::path hint = fs::path(data_dir) / "data_config.cfg";
        if (fs::exists(hint)) cfg = load_config_file(hint.string(), std::move(cfg));
    }
    if (const char* env = std::getenv("MRDF_CONFIG"); env && *env)
        cfg = load_config_file(env, std::move(cfg));
    if (!opts.config_path.empty()) cfg = load_config_file(opts.config_path, std::move(cfg));
    apply_overrides(cfg, opts.overrides);
    return cfg;
}

// Infers encoder input dims from the data when the config leaves them unset.
void fill_input_shapes(Config& cfg, const std::vector<LoadedClip>& clips) {
    if (clips.empty()) return;
    if (cfg.model.audio_encoder.input_shape.empty())
        cfg.model.audio_encoder.input_shape = {static_cast<int>(clips[0].features.audio.cols())};
    if (cfg.model.visual_encoder.input_shape.empty())
        cfg.model.visual_encoder.input_shape = {static_cast<int>(clips[0].features.visual.cols())};
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Audio-visual deepfake detection with cross- and within-modality "
                 "regularization"};
    app.require_subcommand(1);

    // --- synth ---
    auto* synth = app.add_subcommand("synth", "Generate a synthetic audio-visual dataset");
    SynthSpec spec;
    std::string synth_out;
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--seed", spec.seed, "Generator seed");
    synth->add_option("--identities", spec.n_identities, "Number of identities");
    synth->add_option("--clips", spec.clips_per_category, "Clips per category");
    synth->add_option("--frames", spec.frames, "Frames per clip");
    synth->add_option("--latent-dim", spec.latent_dim, "Latent dimension");
    synth->add_option("--noise", spec.noise_scale, "Observation noise scale");
    synth->add_option("--shift", spec.manipulation_shift, "Manipulation mean shift");
    synth->add_option("--visual-shift-scale", spec.visual_shift_scale,
                      "Relative strength of visual manipulations");
    synth->add_option("--identity-scale", spec.identity_scale,
                      "Strength of per-identity latent signatures");
    synth->add_option("--frame-jitter", spec.frame_jitter,
                      "Within-clip latent variation around the base");
    synth->callback([&] {
        generate_synthetic(spec, synth_out);
        std::ofstream hint(fs::path(synth_out) / "data_config.cfg");
        hint << "# written by `mrdf synth`; generator parameters:\n"
             << "#   seed=" << spec.seed << " identities=" << spec.n_identities
             << " clips_per_category=" << spec.clips_per_category << " frames=" << spec.frames
             << "\n"
             << "#   latent_dim=" << spec.latent_dim << " noise=" << spec.noise_scale
             << " shift=" << spec.manipulation_shift << " visual_shift_scale="
             << spec.visual_shift_scale << "\n"
             << "#   identity_scale=" << spec.identity_scale << " frame_jitter="
             << spec.frame_jitter << "\n"
             << "# features are frame-aligned:\n"
             << "frontend.ratio = 1\n"
             << "encoders.audio.input = " << spec.latent_dim << "\n"
             << "encoders.visual.input = " << spec.latent_dim << "\n";
        std::cout << "wrote " << spec.clips_per_category * 4 << " clips ("
                  << spec.n_identities << " identities) under " << synth_out << "\n";
    });

    // --- manifest ---
    auto* man = app.add_subcommand("manifest", "Inspect or rebalance a manifest");
    std::string man_data, man_manifest, man_out;
    int man_balance = -1;
    std::uint64_t man_seed = 0;
    man->add_option("--data", man_data, "Data directory (expects manifest.tsv)");
    man->add_option("--manifest", man_manifest, "Manifest path (overrides --data)");
    man->add_option("--balance", man_balance, "Write a balanced subset of this size per category");
    man->add_option("--seed", man_seed, "Subset seed");
    man->add_option("--out", man_out, "Output manifest path for --balance");
    man->callback([&] {
        if (man_data.empty() && man_manifest.empty())
            throw UsageError("manifest: provide --data or --manifest");
        Manifest m = load_data_manifest(man_data, man_manifest);
        std::cout << "samples " << m.size() << "\n";
        std::cout << "identities " << m.identities().size() << "\n";
        for (auto& [cat, count] : m.category_counts())
            std::cout << "category." << category_name(cat) << " " << count << "\n";
        if (man_balance >= 0) {
            if (man_out.empty()) throw UsageError("manifest: --balance requires --out");
            Manifest b = balanced_subset(m, static_cast<std::size_t>(man_balance), man_seed);
            save_manifest(b, man_out);
            std::cout << "balanced manifest (" << b.size() << " samples) -> " << man_out << "\n";
        }
    });

    // --- split ---
    auto* split = app.add_subcommand("split", "Write an identity-disjoint k-fold plan");
    std::string split_data, split_manifest, split_out;
    int split_k = 5;
    std::uint64_t split_seed = 0;
    split->add_option("--data", split_data, "Data directory");
    split->add_option("--manifest", split_manifest, "Manifest path (overrides --data)");
    split->add_option("--k", split_k, "Number of folds");
    split->add_option("--seed", split_seed, "Fold seed");
    split->add_option("--out", split_out, "Output fold plan path")->required();
    split->callback([&] {
        if (split_data.empty() && split_manifest.empty())
            throw UsageError("split: provide --data or --manifest");
        Manifest m = load_data_manifest(split_data, split_manifest);
        FoldPlan plan = identity_kfold(m, split_k, split_seed);
        save_fold_plan(plan, split_out);
        std::cout << "fold plan (k=" << split_k << ") -> " << split_out << "\n";
    });

    // --- train ---
    auto* train = app.add_subcommand("train", "Train one model on a manifest");
    CommonOpts train_opts;
    std::string train_data, train_manifest, train_out, train_resume;
    add_common(train, train_opts);
    train->add_option("--data", train_data, "Data directory");
    train->add_option("--manifest", train_manifest, "Manifest path (overrides --data)");
    train->add_option("--out", train_out, "Run directory")->required();
    train->add_option("--resume", train_resume, "Trainer checkpoint to resume from");
    std::string train_variant, train_seed_s;
    train->add_option("--variant", train_variant, "baseline | margin | ce");
    train->add_option("--seed", train_seed_s, "Training seed");
    train->callback([&] {
        if (train_data.empty() && train_manifest.empty())
            throw UsageError("train: provide --data or --manifest");
        Config cfg = config_for_data(train_opts, train_data);
        if (!train_variant.empty()) cfg.apply("loss.variant", train_variant);
        if (!train_seed_s.empty()) cfg.apply("train.seed", train_seed_s);

        Manifest m = load_data_manifest(train_data, train_manifest);
        auto clips = load_all_clips(m, cfg.frontend.ratio);
        fill_input_shapes(cfg, clips);
        write_config_echo(cfg, train_out);

        auto [tr_clips, val_clips] =
            split_validation(clips, cfg.train.val_fraction, cfg.train.seed);
        Model model(cfg.model, cfg.train.seed);
        TrainResult res;
        if (train_resume.empty())
            res = train_model(model, tr_clips, val_clips, cfg.train, train_out);
        else
            res = resume_training(model, train_resume, tr_clips, val_clips, cfg.train, train_out);

        const auto& hist = res.state.history;
        for (std::size_t e = 0; e < hist.size(); ++e)
            std::cout << "epoch " << e + 1 << " total " << hist[e].mean_loss.total << " val_auc "
                      << hist[e].val_auc << "\n";
        std::cout << "final checkpoint " << res.last_checkpoint << "\n";
        if (!res.best_checkpoint.empty())
            std::cout << "best checkpoint " << res.best_checkpoint << " (epoch "
                      << res.state.best_epoch << ")\n";
    });

    // --- eval ---
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
    CommonOpts eval_opts;
    std::string eval_data, eval_manifest, eval_ckpt, eval_out;
    add_common(eval, eval_opts);
    eval->add_option("--data", eval_data, "Data directory");
    eval->add_option("--manifest", eval_manifest, "Manifest path (overrides --data)");
    eval->add_option("--checkpoint", eval_ckpt, "Model checkpoint")->required();
    eval->add_option("--out", eval_out, "Output directory")->required();
    eval->callback([&] {
        if (eval_data.empty() && eval_manifest.empty())
            throw UsageError("eval: provide --data or --manifest");
        Config cfg = config_for_data(eval_opts, eval_data);
        Manifest m = load_data_manifest(eval_data, eval_manifest);
        auto clips = load_all_clips(m, cfg.frontend.ratio);
        write_config_echo(cfg, eval_out);

        Model model = model_from_checkpoint(Checkpoint::load(eval_ckpt));
        auto preds = predict(model, clips);
        EvalReport report = evaluate_predictions(preds);
        save_predictions(preds, (fs::path(eval_out) / "predictions.tsv").string());
        std::ofstream os(fs::path(eval_out) / "report.txt");
        write_report(os, report);
        write_report(std::cout, report);
    });

    // --- crossval ---
    auto* cv = app.add_subcommand("crossval", "Identity-disjoint k-fold cross-validation");
    CommonOpts cv_opts;
    std::string cv_data, cv_manifest, cv_out, cv_variant, cv_seed_s;
    int cv_k = 5;
    std::uint64_t cv_fold_seed = 0;
    add_common(cv, cv_opts);
    cv->add_option("--data", cv_data, "Data directory");
    cv->add_option("--manifest", cv_manifest, "Manifest path (overrides --data)");
    cv->add_option("--k", cv_k, "Number of folds");
    cv->add_option("--fold-seed", cv_fold_seed, "Identity partition seed");
    cv->add_option("--variant", cv_variant, "baseline | margin | ce");
    cv->add_option("--seed", cv_seed_s, "Training seed");
    cv->add_option("--out", cv_out, "Output directory")->required();
    cv->callback([&] {
        if (cv_data.empty() && cv_manifest.empty())
            throw UsageError("crossval: provide --data or --manifest");
        Config cfg = config_for_data(cv_opts, cv_data);
        if (!cv_variant.empty()) cfg.apply("loss.variant", cv_variant);
        if (!cv_seed_s.empty()) cfg.apply("train.seed", cv_seed_s);

        Manifest m = load_data_manifest(cv_data, cv_manifest);
        auto clips = load_all_clips(m, cfg.frontend.ratio);
        fill_input_shapes(cfg, clips);
        write_config_echo(cfg, cv_out);

        CrossValReport report =
            cross_validate(m, clips, cfg.model, cfg.train, cv_k, cv_fold_seed, cv_out);
        write_crossval_report(std::cout, report);
    });

    // --- visualize ---
    auto* viz = app.add_subcommand("visualize", "Dump embeddings and project them to 2-D");
    CommonOpts viz_opts;
    std::string viz_data, viz_manifest, viz_ckpt, viz_out, viz_stage = "pre_fusion_audio";
    std::uint64_t viz_seed = 0;
    add_common(viz, viz_opts);
    viz->add_option("--data", viz_data, "Data directory");
    viz->add_option("--manifest", viz_manifest, "Manifest path (overrides --data)");
    viz->add_option("--checkpoint", viz_ckpt, "Model checkpoint")->required();
    viz->add_option("--stage", viz_stage, "pre_fusion_audio | pre_fusion_visual | post_fusion");
    viz->add_option("--seed", viz_seed, "Projection seed");
    viz->add_option("--out", viz_out, "Output directory")->required();
    viz->callback([&] {
        if (viz_data.empty() && viz_manifest.empty())
            throw UsageError("visualize: provide --data or --manifest");
        Config cfg = config_for_data(viz_opts, viz_data);
        Manifest m = load_data_manifest(viz_data, viz_manifest);
        auto clips = load_all_clips(m, cfg.frontend.ratio);
        write_config_echo(cfg, viz_out);

        Model model = model_from_checkpoint(Checkpoint::load(viz_ckpt));
        const EmbeddingStage stage = embedding_stage_from_name(viz_stage);
        EmbeddingDump dump = dump_embeddings(model, clips, stage);
        const std::string prefix = (fs::path(viz_out) / viz_stage).string();
        save_embedding_dump(dump, prefix + "_embeddings.tsv");
        ProjectionResult res = project_2d(dump, cfg.viz_perplexity, viz_seed, prefix);
        std::cout << "embeddings " << prefix + "_embeddings.tsv" << "\n"
                  << "image " << res.image_path << "\n"
                  << "coords " << res.coords_path << "\n";
    });

    // --- check ---
    auto* check = app.add_subcommand("check", "Run the numeric self-test suite");
    check->callback([&] {
        bool all = true;
        for (const auto& r : selfcheck::run_all()) {
            std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name;
            if (!r.detail.empty()) std::cout << " — " << r.detail;
            std::cout << "\n";
            all = all && r.passed;
        }
        if (!all) throw NumericError("self-test failures");
        std::cout << "all properties passed\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}
