#pragma once

#include <string>
#include <vector>

#include "mrdf/autodiff.hpp"
#include "mrdf/types.hpp"

namespace mrdf::loss {

enum class Reduction { Mean, Sum };
enum class Variant { Baseline, Margin, CrossEntropy };
enum class WmrTarget { Modality, Multimodal };

Reduction reduction_from_name(const std::string& name);
const char* reduction_name(Reduction r);
Variant variant_from_name(const std::string& name);
const char* variant_name(Variant v);
WmrTarget wmr_target_from_name(const std::string& name);
const char* wmr_target_name(WmrTarget t);

struct MarginConfig {
    double alpha_audio = 0.0;
    double alpha_visual = 0.0;
    void validate() const; // alphas in [-1, 1]
};

struct WeightConfig {
    double ce = 1.0;
    double cmr = 1.0;
    double wmr = 1.0;
    void validate() const; // nonnegative, at least one positive
};

// Degenerate inputs are mapped to well-defined values instead of NaNs; the
// flags record that it happened.
struct LossFlags {
    bool zero_norm_embedding = false;
    bool no_pairs = false;
    bool empty_pairing_batch = false;
};

// cosine(u, v) = u.v / (|u||v|); zero-norm inputs give 0 with the flag set.
double cosine(const Vec& u, const Vec& v, LossFlags* flags = nullptr);

// ---------------------------------------------------------------------------
// Graph builders. Each returns a 1x1 scalar on the embeddings' tape; the
// analytic gradient flows through tape.backward(). Value-only callers can run
// them on a throwaway tape (see the *_value wrappers).
// ---------------------------------------------------------------------------

// Pairing loss over clip embeddings: paired clips are pulled toward cosine 1,
// unpaired ones hinged at 0. `include` masks clips out of the term entirely
// (used by the single-fake-negative pairing policy); pass empty for all-in.
ad::Var cross_modality_loss(ad::Var emb_audio, ad::Var emb_visual,
                            const std::vector<int>& paired, const std::vector<int>& include,
                            Reduction red, LossFlags* flags = nullptr);

// Pairwise margin loss within one modality over all unordered same-batch
// pairs: same-label pairs contribute 1 - cos, different-label pairs hinge at
// alpha. B < 2 yields 0 with the no_pairs flag.
ad::Var within_modality_margin_loss(ad::Var emb, const std::vector<int>& labels, double alpha,
                                    Reduction red, LossFlags* flags = nullptr);

// Softmax cross-entropy over [B x 2] logits with binary labels; used both for
// the detection objective on fused features and for the cross-entropy style
// within-modality term on unimodal logits.
ad::Var cross_entropy_loss(ad::Var logits, const std::vector<int>& labels, Reduction red,
                           LossFlags* flags = nullptr);

// Weighted total per the variant: Margin and CrossEntropy differ only in
// which within-modality term fills the wmr slots; Baseline zeroes both
// regularizers.
struct TotalLoss {
    ad::Var total;
    LossBreakdown breakdown;
};
TotalLoss total_loss(ad::Tape& tape, ad::Var ce, ad::Var cmr, ad::Var wmr_audio,
                     ad::Var wmr_visual, const WeightConfig& weights);

// ---------------------------------------------------------------------------
// Value-only wrappers (no gradients), for logging and tests.
// ---------------------------------------------------------------------------

double cross_modality_loss_value(const Mat& emb_audio, const Mat& emb_visual,
                                 const std::vector<int>& paired, const std::vector<int>& include,
                                 Reduction red, LossFlags* flags = nullptr);
double within_modality_margin_loss_value(const Mat& emb, const std::vector<int>& labels,
                                         double alpha, Reduction red, LossFlags* flags = nullptr);
double cross_entropy_loss_value(const Mat& logits, const std::vector<int>& labels, Reduction red,
                                LossFlags* flags = nullptr);

} // namespace mrdf::loss
