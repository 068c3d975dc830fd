#include "mrdf/losses.hpp"

#include <cmath>

#include "mrdf/errors.hpp"

namespace mrdf::loss {

Reduction reduction_from_name(const std::string& name) {
    if (name == "mean") return Reduction::Mean;
    if (name == "sum") return Reduction::Sum;
    throw DataError("unknown reduction '" + name + "'");
}

const char* reduction_name(Reduction r) { return r == Reduction::Mean ? "mean" : "sum"; }

Variant variant_from_name(const std::string& name) {
    if (name == "baseline") return Variant::Baseline;
    if (name == "margin") return Variant::Margin;
    if (name == "ce") return Variant::CrossEntropy;
    throw DataError("unknown loss variant '" + name + "'");
}

const char* variant_name(Variant v) {
    switch (v) {
    case Variant::Baseline: return "baseline";
    case Variant::Margin: return "margin";
    case Variant::CrossEntropy: return "ce";
    }
    return "?";
}

WmrTarget wmr_target_from_name(const std::string& name) {
    if (name == "modality") return WmrTarget::Modality;
    if (name == "multimodal") return WmrTarget::Multimodal;
    throw DataError("unknown wmr target '" + name + "'");
}

const char* wmr_target_name(WmrTarget t) {
    return t == WmrTarget::Modality ? "modality" : "multimodal";
}

void MarginConfig::validate() const {
    if (alpha_audio < -1.0 || alpha_audio > 1.0 || alpha_visual < -1.0 || alpha_visual > 1.0)
        throw DataError("margin values must lie in [-1, 1]");
}

void WeightConfig::validate() const {
    if (ce < 0.0 || cmr < 0.0 || wmr < 0.0) throw DataError("loss weights must be nonnegative");
    if (ce == 0.0 && cmr == 0.0 && wmr == 0.0)
        throw DataError("at least one loss weight must be positive");
}

double cosine(const Vec& u, const Vec& v, LossFlags* flags) {
    if (u.size() != v.size()) throw NumericError("cosine: dimension mismatch");
    const double nu = u.norm(), nv = v.norm();
    if (nu <= 0.0 || nv <= 0.0) {
        if (flags) flags->zero_norm_embedding = true;
        return 0.0;
    }
    return u.dot(v) / (nu * nv);
}

namespace {

void note_zero_rows(const Mat& m, LossFlags* flags) {
    if (!flags) return;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        if (m.row(r).norm() <= 0.0) flags->zero_norm_embedding = true;
}

void check_finite(const Mat& m, const char* what) {
    if (!m.allFinite()) throw NumericError(std::string(what) + ": non-finite input");
}

} // namespace

ad::Var cross_modality_loss(ad::Var emb_audio, ad::Var emb_visual, const std::vector<int>& paired,
                            const std::vector<int>& include, Reduction red, LossFlags* flags) {
    ad::Tape* t = emb_audio.tape();
    const Eigen::Index batch = emb_audio.rows();
    if (emb_visual.rows() != batch)
        throw NumericError("cross_modality_loss: batch size mismatch");
    if (emb_audio.cols() != emb_visual.cols())
        throw NumericError("cross_modality_loss: embedding dims differ (" +
                           std::to_string(emb_audio.cols()) + " vs " +
                           std::to_string(emb_visual.cols()) + "); project both modalities into "
                           "a shared space first");
    if (static_cast<Eigen::Index>(paired.size()) != batch)
        throw NumericError("cross_modality_loss: label count mismatch");
    if (!include.empty() && static_cast<Eigen::Index>(include.size()) != batch)
        throw NumericError("cross_modality_loss: include mask size mismatch");

    note_zero_rows(emb_audio.value(), flags);
    note_zero_rows(emb_visual.value(), flags);

    Mat pos = Mat::Zero(batch, 1);
    Mat neg = Mat::Zero(batch, 1);
    Eigen::Index counted = 0;
    for (Eigen::Index i = 0; i < batch; ++i) {
        const bool in = include.empty() || include[static_cast<std::size_t>(i)] != 0;
        if (!in) continue;
        ++counted;
        (paired[static_cast<std::size_t>(i)] ? pos : neg)(i, 0) = 1.0;
    }
    if (counted == 0) {
        if (flags) flags->empty_pairing_batch = true;
        return t->scalar(0.0);
    }

    ad::Var d = ad::cosine_rows(emb_audio, emb_visual); // [B x 1]
    ad::Var pos_term = ad::mul(t->constant(pos), ad::scalar_add(ad::neg(d), 1.0)); // y*(1-d)
    ad::Var neg_term = ad::mul(t->constant(neg), ad::relu(d));                     // (1-y)*max(0,d)
    ad::Var total = ad::sum_all(ad::add(pos_term, neg_term));
    if (red == Reduction::Mean) total = ad::scalar_mul(total, 1.0 / static_cast<double>(counted));
    return total;
}

ad::Var within_modality_margin_loss(ad::Var emb, const std::vector<int>& labels, double alpha,
                                    Reduction red, LossFlags* flags) {
    ad::Tape* t = emb.tape();
    const Eigen::Index batch = emb.rows();
    if (static_cast<Eigen::Index>(labels.size()) != batch)
        throw NumericError("within_modality_margin_loss: label count mismatch");
    if (batch < 2) {
        if (flags) flags->no_pairs = true;
        return t->scalar(0.0);
    }
    note_zero_rows(emb.value(), flags);

    // Unordered pairs i < j as strictly upper-triangular masks over the
    // cosine Gram matrix of the L2-normalized embeddings.
    Mat same = Mat::Zero(batch, batch);
    Mat diff = Mat::Zero(batch, batch);
    for (Eigen::Index i = 0; i < batch; ++i)
        for (Eigen::Index j = i + 1; j < batch; ++j)
            (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? same
                                                                                        : diff)(i, j) = 1.0;

    ad::Var unit = ad::row_normalize(emb);
    ad::Var gram = ad::matmul(unit, ad::transpose(unit)); // [B x B] cosines
    ad::Var same_term = ad::mul(t->constant(same), ad::scalar_add(ad::neg(gram), 1.0));
    ad::Var diff_term = ad::mul(t->constant(diff), ad::relu(ad::scalar_add(gram, -alpha)));
    ad::Var total = ad::sum_all(ad::add(same_term, diff_term));
    if (red == Reduction::Mean) {
        const double n_pairs = static_cast<double>(batch * (batch - 1)) / 2.0;
        total = ad::scalar_mul(total, 1.0 / n_pairs);
    }
    return total;
}

ad::Var cross_entropy_loss(ad::Var logits, const std::vector<int>& labels, Reduction red,
                           LossFlags* flags) {
    (void)flags;
    ad::Tape* t = logits.tape();
    const Eigen::Index batch = logits.rows();
    if (logits.cols() != 2) throw NumericError("cross_entropy_loss: expected [B x 2] logits");
    if (static_cast<Eigen::Index>(labels.size()) != batch)
        throw NumericError("cross_entropy_loss: label count mismatch");
    if (batch < 1) throw NumericError("cross_entropy_loss: empty batch");
    check_finite(logits.value(), "cross_entropy_loss");

    Mat onehot = Mat::Zero(batch, 2);
    for (Eigen::Index i = 0; i < batch; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        if (y != 0 && y != 1) throw NumericError("cross_entropy_loss: labels must be binary");
        onehot(i, y) = 1.0;
    }
    ad::Var lsm = ad::log_softmax_rows(logits);
    ad::Var picked = ad::sum_all(ad::mul(t->constant(onehot), lsm));
    const double scale = red == Reduction::Mean ? -1.0 / static_cast<double>(batch) : -1.0;
    return ad::scalar_mul(picked, scale);
}

TotalLoss total_loss(ad::Tape& tape, ad::Var ce, ad::Var cmr, ad::Var wmr_audio,
                     ad::Var wmr_visual, const WeightConfig& weights) {
    weights.validate();
    auto or_zero = [&](ad::Var v) { return v.valid() ? v : tape.scalar(0.0); };
    ce = or_zero(ce);
    cmr = or_zero(cmr);
    wmr_audio = or_zero(wmr_audio);
    wmr_visual = or_zero(wmr_visual);

    ad::Var total = ad::add(
        ad::add(ad::scalar_mul(ce, weights.ce), ad::scalar_mul(cmr, weights.cmr)),
        ad::scalar_mul(ad::add(wmr_audio, wmr_visual), weights.wmr));

    TotalLoss out;
    out.total = total;
    out.breakdown.ce = ce.scalar();
    out.breakdown.cmr = cmr.scalar();
    out.breakdown.wmr_audio = wmr_audio.scalar();
    out.breakdown.wmr_visual = wmr_visual.scalar();
    out.breakdown.weight_ce = weights.ce;
    out.breakdown.weight_cmr = weights.cmr;
    out.breakdown.weight_wmr = weights.wmr;
    out.breakdown.total = total.scalar();
    return out;
}

double cross_modality_loss_value(const Mat& emb_audio, const Mat& emb_visual,
                                 const std::vector<int>& paired, const std::vector<int>& include,
                                 Reduction red, LossFlags* flags) {
    ad::Tape tape;
    return cross_modality_loss(tape.constant(emb_audio), tape.constant(emb_visual), paired,
                               include, red, flags)
        .scalar();
}

double within_modality_margin_loss_value(const Mat& emb, const std::vector<int>& labels,
                                         double alpha, Reduction red, LossFlags* flags) {
    ad::Tape tape;
    return within_modality_margin_loss(tape.constant(emb), labels, alpha, red, flags).scalar();
}

double cross_entropy_loss_value(const Mat& logits, const std::vector<int>& labels, Reduction red,
                                LossFlags* flags) {
    ad::Tape tape;
    return cross_entropy_loss(tape.constant(logits), labels, red, flags).scalar();
}

} // namespace mrdf::loss
