#include "mrdf/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "mrdf/errors.hpp"
#include "mrdf/evaluation.hpp"

namespace fs = std::filesystem;

namespace mrdf {

void TrainConfig::validate() const {
    if (epochs < 1) throw DataError("train: epochs must be >= 1");
    if (batch_size < 2) throw DataError("train: batch_size must be >= 2 (pairwise losses)");
    if (lr <= 0.0) throw DataError("train: lr must be > 0");
    if (val_fraction < 0.0 || val_fraction >= 1.0)
        throw DataError("train: val_fraction must be in [0, 1)");
    weights.validate();
    margins.validate();
}

loss::WeightConfig TrainConfig::effective_weights() const {
    loss::WeightConfig w = weights;
    if (variant == loss::Variant::Baseline) {
        w.cmr = 0.0;
        w.wmr = 0.0;
    }
    return w;
}

std::pair<std::vector<LoadedClip>, std::vector<LoadedClip>>
split_validation(const std::vector<LoadedClip>& clips, double fraction, std::uint64_t seed) {
    if (fraction <= 0.0) return {clips, {}};
    std::set<std::string> ident_set;
    for (const auto& c : clips) ident_set.insert(c.sample.identity);
    std::vector<std::string> identities(ident_set.begin(), ident_set.end());
    if (identities.size() < 2) return {clips, {}};

    Rng rng(seed);
    rng.shuffle(identities);
    std::size_t n_val = static_cast<std::size_t>(
        std::lround(fraction * static_cast<double>(identities.size())));
    n_val = std::clamp<std::size_t>(n_val, 1, identities.size() - 1);
    std::set<std::string> val_idents(identities.begin(),
                                     identities.begin() + static_cast<std::ptrdiff_t>(n_val));

    std::pair<std::vector<LoadedClip>, std::vector<LoadedClip>> out;
    for (const auto& c : clips)
        (val_idents.count(c.sample.identity) ? out.second : out.first).push_back(c);
    return out;
}

namespace {

std::vector<std::size_t> epoch_order(const std::vector<LoadedClip>& clips, bool stratified,
                                     Rng& rng) {
    if (!stratified) {
        std::vector<std::size_t> order(clips.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);
        return order;
    }
    // Shuffle within each category, then interleave so every batch sees a
    // mixed label distribution.
    std::array<std::vector<std::size_t>, 4> per_cat;
    for (std::size_t i = 0; i < clips.size(); ++i)
        per_cat[static_cast<std::size_t>(category_index(clips[i].sample.category))].push_back(i);
    for (auto& v : per_cat) rng.shuffle(v);
    std::vector<std::size_t> order;
    order.reserve(clips.size());
    for (std::size_t round = 0;; ++round) {
        bool any = false;
        for (auto& v : per_cat)
            if (round < v.size()) {
                order.push_back(v[round]);
                any = true;
            }
        if (!any) break;
    }
    return order;
}

void check_term_finite(double v, const char* term, int epoch, long step) {
    if (!std::isfinite(v))
        throw NumericError(std::string("non-finite loss term ") + term + " at epoch " +
                           std::to_string(epoch + 1) + ", step " + std::to_string(step));
}

struct BatchLabels {
    std::vector<int> fake, fake_audio, fake_visual, paired, include;
};

BatchLabels batch_labels(const std::vector<LoadedClip>& clips,
                         const std::vector<std::size_t>& idx, PairingPolicy policy) {
    BatchLabels l;
    for (std::size_t i : idx) {
        const LabelSet& s = clips[i].sample.labels;
        l.fake.push_back(s.fake);
        l.fake_audio.push_back(s.fake_audio);
        l.fake_visual.push_back(s.fake_visual);
        l.paired.push_back(s.paired);
        l.include.push_back(in_pairing_loss(clips[i].sample.category, policy) ? 1 : 0);
    }
    return l;
}

Mat history_to_mat(const std::vector<EpochStats>& history) {
    Mat m(static_cast<Eigen::Index>(history.size()), 10);
    for (std::size_t e = 0; e < history.size(); ++e) {
        const auto& h = history[e];
        m.row(static_cast<Eigen::Index>(e)) << h.mean_loss.ce, h.mean_loss.cmr,
            h.mean_loss.wmr_audio, h.mean_loss.wmr_visual, h.mean_loss.total,
            h.mean_loss.weight_ce, h.mean_loss.weight_cmr, h.mean_loss.weight_wmr, h.val_auc,
            h.val_accuracy;
    }
    return m;
}

std::vector<EpochStats> history_from_mat(const Mat& m) {
    std::vector<EpochStats> out;
    for (Eigen::Index e = 0; e < m.rows(); ++e) {
        EpochStats h;
        h.mean_loss.ce = m(e, 0);
        h.mean_loss.cmr = m(e, 1);
        h.mean_loss.wmr_audio = m(e, 2);
        h.mean_loss.wmr_visual = m(e, 3);
        h.mean_loss.total = m(e, 4);
        h.mean_loss.weight_ce = m(e, 5);
        h.mean_loss.weight_cmr = m(e, 6);
        h.mean_loss.weight_wmr = m(e, 7);
        h.val_auc = m(e, 8);
        h.val_accuracy = m(e, 9);
        out.push_back(h);
    }
    return out;
}

Mat steps_to_mat(const std::vector<LossBreakdown>& steps) {
    Mat m(static_cast<Eigen::Index>(steps.size()), 8);
    for (std::size_t s = 0; s < steps.size(); ++s) {
        const auto& b = steps[s];
        m.row(static_cast<Eigen::Index>(s)) << b.ce, b.cmr, b.wmr_audio, b.wmr_visual, b.total,
            b.weight_ce, b.weight_cmr, b.weight_wmr;
    }
    return m;
}

std::vector<LossBreakdown> steps_from_mat(const Mat& m) {
    std::vector<LossBreakdown> out;
    for (Eigen::Index s = 0; s < m.rows(); ++s) {
        LossBreakdown b;
        b.ce = m(s, 0);
        b.cmr = m(s, 1);
        b.wmr_audio = m(s, 2);
        b.wmr_visual = m(s, 3);
        b.total = m(s, 4);
        b.weight_ce = m(s, 5);
        b.weight_cmr = m(s, 6);
        b.weight_wmr = m(s, 7);
        out.push_back(b);
    }
    return out;
}

TrainResult run_training(Model& model, const std::vector<LoadedClip>& train_clips,
                         const std::vector<LoadedClip>& val_clips, const TrainConfig& cfg,
                         const std::string& out_dir, TrainState state, Adam opt, Rng rng) {
    if (train_clips.empty()) throw DataError("train: empty training set");
    const loss::WeightConfig weights = cfg.effective_weights();
    const bool use_cmr = weights.cmr > 0.0;
    const bool use_wmr = weights.wmr > 0.0 && cfg.variant != loss::Variant::Baseline;

    if (!out_dir.empty()) fs::create_directories(out_dir);

    const long steps_per_epoch = static_cast<long>(
        (train_clips.size() + static_cast<std::size_t>(cfg.batch_size) - 1) /
        static_cast<std::size_t>(cfg.batch_size));
    const long total_steps = steps_per_epoch * cfg.epochs;

    TrainResult result;
    for (int epoch = state.epochs_done; epoch < cfg.epochs; ++epoch) {
        const auto order = epoch_order(train_clips, cfg.stratified_batches, rng);
        LossBreakdown epoch_sum;
        long epoch_steps = 0;

        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));

            ad::Tape tape;
            Binding binding = model.bind(tape, /*training=*/true, /*with_grad=*/true);
            std::vector<const AlignedClip*> batch;
            for (std::size_t i : idx) batch.push_back(&train_clips[i].features);
            BatchOutputs out = model.forward_batch(binding, batch, &rng);
            const BatchLabels labels = batch_labels(train_clips, idx, cfg.pairing_policy);

            ad::Var ce = loss::cross_entropy_loss(out.logits, labels.fake, cfg.reduction);
            ad::Var cmr, wmr_a, wmr_v;
            if (use_cmr)
                cmr = loss::cross_modality_loss(out.emb_audio, out.emb_visual, labels.paired,
                                                labels.include, cfg.reduction);
            if (use_wmr) {
                if (cfg.variant == loss::Variant::Margin) {
                    wmr_a = loss::within_modality_margin_loss(out.emb_audio, labels.fake_audio,
                                                              cfg.margins.alpha_audio,
                                                              cfg.reduction);
                    wmr_v = loss::within_modality_margin_loss(out.emb_visual, labels.fake_visual,
                                                              cfg.margins.alpha_visual,
                                                              cfg.reduction);
                } else {
                    const auto& ta = cfg.wmr_target == loss::WmrTarget::Modality
                                         ? labels.fake_audio
                                         : labels.fake;
                    const auto& tv = cfg.wmr_target == loss::WmrTarget::Modality
                                         ? labels.fake_visual
                                         : labels.fake;
                    wmr_a = loss::cross_entropy_loss(out.logits_audio, ta, cfg.reduction);
                    wmr_v = loss::cross_entropy_loss(out.logits_visual, tv, cfg.reduction);
                }
            }

            loss::TotalLoss tl = loss::total_loss(tape, ce, cmr, wmr_a, wmr_v, weights);
            check_term_finite(tl.breakdown.ce, "l_ce", epoch, state.step);
            check_term_finite(tl.breakdown.cmr, "l_cmr", epoch, state.step);
            check_term_finite(tl.breakdown.wmr_audio, "l_wmr_audio", epoch, state.step);
            check_term_finite(tl.breakdown.wmr_visual, "l_wmr_visual", epoch, state.step);
            check_term_finite(tl.breakdown.total, "total", epoch, state.step);

            tape.backward(tl.total);
            std::map<std::string, Mat> grads;
            for (const auto& [name, var] : binding.vars) grads[name] = var.grad();

            double lr_scale = 1.0;
            if (cfg.cosine_lr_decay)
                lr_scale = 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(state.step) /
                                                 static_cast<double>(total_steps)));
            opt.step(model.params(), grads, lr_scale);

            state.step_log.push_back(tl.breakdown);
            ++state.step;
            ++epoch_steps;
            epoch_sum.ce += tl.breakdown.ce;
            epoch_sum.cmr += tl.breakdown.cmr;
            epoch_sum.wmr_audio += tl.breakdown.wmr_audio;
            epoch_sum.wmr_visual += tl.breakdown.wmr_visual;
            epoch_sum.total += tl.breakdown.total;
        }

        EpochStats stats;
        const double inv = 1.0 / static_cast<double>(epoch_steps);
        stats.mean_loss.ce = epoch_sum.ce * inv;
        stats.mean_loss.cmr = epoch_sum.cmr * inv;
        stats.mean_loss.wmr_audio = epoch_sum.wmr_audio * inv;
        stats.mean_loss.wmr_visual = epoch_sum.wmr_visual * inv;
        stats.mean_loss.total = epoch_sum.total * inv;
        stats.mean_loss.weight_ce = weights.ce;
        stats.mean_loss.weight_cmr = weights.cmr;
        stats.mean_loss.weight_wmr = weights.wmr;

        if (!val_clips.empty()) {
            EvalReport val = [&] {
                try {
                    return evaluate(model, val_clips);
                } catch (const DataError&) {
                    // single-class validation split: AUC undefined
                    EvalReport r;
                    r.auc = std::numeric_limits<double>::quiet_NaN();
                    r.accuracy = std::numeric_limits<double>::quiet_NaN();
                    return r;
                }
            }();
            stats.val_auc = val.auc;
            stats.val_accuracy = val.accuracy;
        }
        state.history.push_back(stats);
        state.epochs_done = epoch + 1;
        state.rng_state = rng.serialize();

        const bool improved = !val_clips.empty() && std::isfinite(stats.val_auc) &&
                              stats.val_auc > state.best_val_auc;
        if (improved) {
            state.best_val_auc = stats.val_auc;
            state.best_epoch = epoch + 1;
        }
        if (!out_dir.empty()) {
            Checkpoint ck;
            write_model(ck, model);
            write_train_state(ck, state, opt);
            const std::string last = (fs::path(out_dir) / "last.ckpt").string();
            ck.save(last);
            result.last_checkpoint = last;
            if (cfg.keep_epoch_checkpoints)
                ck.save((fs::path(out_dir) / ("epoch_" + std::to_string(epoch + 1) + ".ckpt"))
                            .string());
            if (improved) {
                const std::string best = (fs::path(out_dir) / "best.ckpt").string();
                ck.save(best);
                result.best_checkpoint = best;
            }
        }
    }

    result.state = std::move(state);
    return result;
}

} // namespace

void write_train_state(Checkpoint& ck, const TrainState& state, const Adam& opt) {
    ck.put_i64("train.epochs_done", state.epochs_done);
    ck.put_i64("train.step", state.step);
    ck.put_str("train.rng", state.rng_state);
    ck.put_f64("train.best_val_auc", state.best_val_auc);
    ck.put_i64("train.best_epoch", state.best_epoch);
    ck.put_mat("train.history", history_to_mat(state.history));
    ck.put_mat("train.step_log", steps_to_mat(state.step_log));
    opt.save(ck);
}

void read_train_state(const Checkpoint& ck, TrainState& state, Adam& opt) {
    state.epochs_done = static_cast<int>(ck.i64("train.epochs_done"));
    state.step = ck.i64("train.step");
    state.rng_state = ck.str("train.rng");
    state.best_val_auc = ck.f64("train.best_val_auc");
    state.best_epoch = static_cast<int>(ck.i64("train.best_epoch"));
    state.history = history_from_mat(ck.mat("train.history"));
    state.step_log = steps_from_mat(ck.mat("train.step_log"));
    opt.load(ck);
}

TrainResult train_model(Model& model, const std::vector<LoadedClip>& train_clips,
                        const std::vector<LoadedClip>& val_clips, const TrainConfig& cfg,
                        const std::string& out_dir) {
    cfg.validate();
    AdamConfig acfg = cfg.adam;
    acfg.lr = cfg.lr;
    return run_training(model, train_clips, val_clips, cfg, out_dir, TrainState{}, Adam(acfg),
                        Rng(cfg.seed));
}

TrainResult resume_training(Model& model, const std::string& checkpoint_path,
                            const std::vector<LoadedClip>& train_clips,
                            const std::vector<LoadedClip>& val_clips, const TrainConfig& cfg,
                            const std::string& out_dir) {
    cfg.validate();
    const Checkpoint ck = Checkpoint::load(checkpoint_path);
    load_params_into(ck, model);
    AdamConfig acfg = cfg.adam;
    acfg.lr = cfg.lr;
    Adam opt(acfg);
    TrainState state;
    read_train_state(ck, state, opt);
    Rng rng;
    rng.deserialize(state.rng_state);
    return run_training(model, train_clips, val_clips, cfg, out_dir, std::move(state),
                        std::move(opt), std::move(rng));
}

} // namespace mrdf
