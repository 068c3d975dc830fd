#pragma once

#include "mrdf/evaluation.hpp"
#include "mrdf/folds.hpp"
#include "mrdf/trainer.hpp"

namespace mrdf {

struct CrossValReport {
    FoldPlan plan;
    std::vector<EvalReport> per_fold;
    std::vector<TrainState> per_fold_training;
    EvalReport mean;   // field-wise over folds
    EvalReport stddev; // population standard deviation
};

// Identity-disjoint k-fold protocol: per fold, a fresh model (seed derived
// from train seed and fold index) trains on the train side minus a validation
// holdout, then evaluates on the test side. Disjointness is asserted.
// out_dir may be empty to skip all file output.
CrossValReport cross_validate(const Manifest& manifest, const std::vector<LoadedClip>& clips,
                              const ModelConfig& model_config, const TrainConfig& train_config,
                              int k, std::uint64_t fold_seed, const std::string& out_dir);

EvalReport report_mean(const std::vector<EvalReport>& reports);
EvalReport report_stddev(const std::vector<EvalReport>& reports, const EvalReport& mean);

void write_crossval_report(std::ostream& os, const CrossValReport& r);
void save_crossval_table(const CrossValReport& r, const std::string& path); // TSV

} // namespace mrdf
