#pragma once

#include <string>
#include <vector>

namespace mrdf::selfcheck {

struct Result {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Oracle and property checks runnable on any build: naive-loop loss oracles,
// finite-difference gradient checks, the pairwise AUC oracle, the label
// algebra truth table, and the sampling/splitting protocol properties.
// Independent oracles live here, not in the library paths they verify.
Result check_loss_oracles(int n_batches = 100, double tol = 1e-9);
Result check_loss_gradients(int n_instances = 20, double step = 1e-5, double tol = 1e-4);
Result check_auc_oracle(int n_sets = 50, double tol = 1e-12);
Result check_label_algebra();
Result check_protocol_properties(int n_manifests = 200);

std::vector<Result> run_all();

} // namespace mrdf::selfcheck
