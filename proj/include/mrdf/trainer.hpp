#pragma once

#include <limits>
#include <string>
#include <vector>

#include "mrdf/clips.hpp"
#include "mrdf/losses.hpp"
#include "mrdf/model.hpp"
#include "mrdf/optimizer.hpp"

namespace mrdf {

struct TrainConfig {
    int epochs = 30;
    int batch_size = 64;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    loss::Variant variant = loss::Variant::CrossEntropy;
    loss::WeightConfig weights;
    loss::MarginConfig margins;
    loss::Reduction reduction = loss::Reduction::Mean;
    loss::WmrTarget wmr_target = loss::WmrTarget::Modality;
    PairingPolicy pairing_policy = PairingPolicy::AnyFakeNegative;
    bool stratified_batches = false;
    bool cosine_lr_decay = false;
    AdamConfig adam; // lr field ignored; cfg.lr wins
    // Identity-granular validation holdout used when the caller does not
    // supply a validation set explicitly.
    double val_fraction = 0.1;
    bool keep_epoch_checkpoints = false;

    void validate() const;
    // Baseline zeroes both regularizers regardless of the configured weights.
    loss::WeightConfig effective_weights() const;
};

struct EpochStats {
    LossBreakdown mean_loss;
    double val_auc = std::numeric_limits<double>::quiet_NaN();
    double val_accuracy = std::numeric_limits<double>::quiet_NaN();
};

struct TrainState {
    int epochs_done = 0;
    long step = 0;
    std::vector<EpochStats> history;
    std::vector<LossBreakdown> step_log; // one entry per optimization step
    std::string rng_state;
    double best_val_auc = -1.0;
    int best_epoch = -1;
};

struct TrainResult {
    TrainState state;
    std::string last_checkpoint; // also the final-epoch model
    std::string best_checkpoint; // best validation AUC (empty if no val set)
};

// Splits clips into (train, validation) with identity-disjoint membership;
// n_val = max(1, round(fraction * n_identities)) capped below n_identities,
// or empty when fraction == 0.
std::pair<std::vector<LoadedClip>, std::vector<LoadedClip>>
split_validation(const std::vector<LoadedClip>& clips, double fraction, std::uint64_t seed);

// Gradient training per the recipe: Adam, constant lr (optional cosine
// decay), uniform shuffling (optional category-stratified batches), one
// checkpoint per epoch under out_dir (empty out_dir writes nothing).
// Non-finite losses abort with the offending term named.
TrainResult train_model(Model& model, const std::vector<LoadedClip>& train_clips,
                        const std::vector<LoadedClip>& val_clips, const TrainConfig& cfg,
                        const std::string& out_dir);

// Restores params, optimizer state, rng and history from a trainer
// checkpoint, then continues; bit-compatible with an uninterrupted run.
TrainResult resume_training(Model& model, const std::string& checkpoint_path,
                            const std::vector<LoadedClip>& train_clips,
                            const std::vector<LoadedClip>& val_clips, const TrainConfig& cfg,
                            const std::string& out_dir);

// Trainer checkpoint contents beyond the model: optimizer, rng, history.
void write_train_state(Checkpoint& ck, const TrainState& state, const Adam& opt);
void read_train_state(const Checkpoint& ck, TrainState& state, Adam& opt);

} // namespace mrdf
