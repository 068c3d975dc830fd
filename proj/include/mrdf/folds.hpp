#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrdf/manifest.hpp"

namespace mrdf {

// Identity-disjoint cross-validation plan. Folds partition identities, and a
// sample's fold is its identity's fold, so no subject appears in both the
// train and test side of any fold.
struct Fold {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
};

struct FoldPlan {
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<Fold> folds;
};

// Partitions distinct identities into k near-equal groups (sizes differ by at
// most one), deterministic under seed. Requires k >= 2 and at least k
// identities.
FoldPlan identity_kfold(const Manifest& m, int k, std::uint64_t seed);

// Line-oriented serialization: header, then `fold	split	sample_id` rows.
void save_fold_plan(const FoldPlan& p, const std::string& path);
FoldPlan load_fold_plan(const std::string& path);

} // namespace mrdf
