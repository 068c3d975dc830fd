#pragma once

#include <array>
#include <string>
#include <vector>

#include "mrdf/clips.hpp"
#include "mrdf/model.hpp"

namespace mrdf {

// Probability that a random fake outranks a random real, ties counted one
// half. Throws DataError when only one class is present.
double auc_score(const std::vector<double>& scores, const std::vector<int>& labels);

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool flagged = false; // a zero denominator was mapped to 0
};

struct EvalReport {
    long n = 0;
    double accuracy = 0.0;
    double auc = 0.0;
    Prf real_class;
    Prf fake_class;
    // Indexed by category_index(); NaN where the category is absent.
    std::array<double, 4> per_category_accuracy{};
    std::array<long, 4> per_category_count{};
    // confusion[true][pred] over {0 = real, 1 = fake}
    std::array<std::array<long, 2>, 2> confusion{};
    // Mean cosine between the projected audio/visual clip embeddings, per
    // category; the pairing regularizer should drive RARV high.
    std::array<double, 4> mean_pair_cosine{};
};

struct Prediction {
    std::string sample_id;
    Category category = Category::RARV;
    int label_fake = 0;
    double score_fake = 0.0; // fake-class softmax probability
    int pred_fake = 0;       // argmax over the two logits
    double pair_cosine = 0.0;
};

// Inference over loaded clips (eval mode, no gradients).
std::vector<Prediction> predict(Model& model, const std::vector<LoadedClip>& clips);

EvalReport evaluate_predictions(const std::vector<Prediction>& preds);
EvalReport evaluate(Model& model, const std::vector<LoadedClip>& clips);

Prf prf_for_class(const std::array<std::array<long, 2>, 2>& confusion, int cls);

// `sample_id score_fake pred y_m category` per line.
void save_predictions(const std::vector<Prediction>& preds, const std::string& path);

// Key-value text block, one metric per line.
void write_report(std::ostream& os, const EvalReport& r, const std::string& prefix = "");

} // namespace mrdf
