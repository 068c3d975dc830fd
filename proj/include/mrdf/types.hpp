#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>

namespace mrdf {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// The four clip categories of the balanced audio-visual deepfake setting:
// (Fake|Real)Audio x (Fake|Real)Video.
enum class Category { FAFV, FARV, RAFV, RARV };

constexpr std::array<Category, 4> kAllCategories = {Category::FAFV, Category::FARV,
                                                    Category::RAFV, Category::RARV};

const char* category_name(Category c);
Category category_from_name(const std::string& name); // throws DataError on unknown tag
int category_index(Category c);                       // stable 0..3 ordering (FAFV..RARV)

// How clips enter the cross-modality pairing loss. The default treats any clip
// with one or more manipulated modalities as an unpaired negative; the
// alternative counts only single-modality manipulations as negatives and
// drops both-fake clips from the pairing term entirely.
enum class PairingPolicy { AnyFakeNegative, SingleFakeNegative };

const char* pairing_policy_name(PairingPolicy p);
PairingPolicy pairing_policy_from_name(const std::string& name);

// Binary labels derived from the category.
//   fake       — 1 if the clip is a deepfake overall (any modality manipulated)
//   fake_audio — 1 if the audio channel is manipulated
//   fake_visual— 1 if the visual channel is manipulated
//   paired     — 1 iff both channels are genuine (positive audio-visual pair)
struct LabelSet {
    int fake = 0;
    int fake_audio = 0;
    int fake_visual = 0;
    int paired = 0;

    bool operator==(const LabelSet&) const = default;
};

// Deterministic label algebra: fake = fake_audio OR fake_visual,
// paired = NOT fake_audio AND NOT fake_visual.
LabelSet labels_from_category(Category c);

// Whether a clip participates in the cross-modality pairing loss under the
// given policy. Under SingleFakeNegative, both-fake clips are excluded.
bool in_pairing_loss(Category c, PairingPolicy policy);

// One video clip as listed in a manifest. Feature payloads live in the files
// referenced by audio_ref / visual_ref.
struct Sample {
    std::string id;
    std::string identity;
    Category category = Category::RARV;
    LabelSet labels;
    std::string audio_ref;
    std::string visual_ref;
    int frames_audio = 0;
    int frames_visual = 0;
};

// Aligned per-frame feature sequences produced by the encoders, plus the
// temporal-mean clip embeddings used for similarity and the unimodal heads.
struct FeatureClip {
    Mat audio;  // [T x D_a]
    Mat visual; // [T x D_v]
    Vec pooled_audio;
    Vec pooled_visual;
};

// Values of the individual objective terms and their weighted total.
struct LossBreakdown {
    double ce = 0.0;
    double cmr = 0.0;
    double wmr_audio = 0.0;
    double wmr_visual = 0.0;
    double total = 0.0;
    double weight_ce = 1.0;
    double weight_cmr = 1.0;
    double weight_wmr = 1.0;

    double recompute_total() const {
        return weight_ce * ce + weight_cmr * cmr + weight_wmr * (wmr_audio + wmr_visual);
    }
};

inline Vec temporal_mean(const Mat& frames) { return frames.colwise().mean().transpose(); }

} // namespace mrdf
