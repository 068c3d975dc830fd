#include "mrdf/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include "mrdf/errors.hpp"
#include "mrdf/losses.hpp"

namespace mrdf {

double auc_score(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw DataError("auc: score/label count mismatch");
    const std::size_t n = scores.size();
    std::size_t n_fake = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw DataError("auc: labels must be binary");
        n_fake += static_cast<std::size_t>(y);
    }
    const std::size_t n_real = n - n_fake;
    if (n_fake == 0 || n_real == 0)
        throw DataError("auc undefined: only one class present (" + std::to_string(n_fake) +
                        " fake of " + std::to_string(n) + ")");

    // Rank statistic with average ranks over ties; equivalent to the O(N^2)
    // pairwise count with half-credit ties.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_fake = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]]) rank_sum_fake += avg_rank;
        i = j + 1;
    }
    const double nf = static_cast<double>(n_fake), nr = static_cast<double>(n_real);
    return (rank_sum_fake - nf * (nf + 1.0) / 2.0) / (nf * nr);
}

Prf prf_for_class(const std::array<std::array<long, 2>, 2>& confusion, int cls) {
    Prf p;
    const long tp = confusion[cls][cls];
    const long fp = confusion[1 - cls][cls];
    const long fn = confusion[cls][1 - cls];
    if (tp + fp > 0)
        p.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    else
        p.flagged = true;
    if (tp + fn > 0)
        p.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    else
        p.flagged = true;
    if (p.precision + p.recall > 0.0)
        p.f1 = 2.0 * p.precision * p.recall / (p.precision + p.recall);
    else
        p.flagged = true;
    return p;
}

std::vector<Prediction> predict(Model& model, const std::vector<LoadedClip>& clips) {
    std::vector<Prediction> preds;
    preds.reserve(clips.size());
    for (const auto& clip : clips) {
        ad::Tape tape;
        Binding b = model.bind(tape, /*training=*/false, /*with_grad=*/false);
        ClipOutputs out = model.forward_clip(b, clip.features);

        Prediction p;
        p.sample_id = clip.sample.id;
        p.category = clip.sample.category;
        p.label_fake = clip.sample.labels.fake;
        const Mat& logits = out.logits.value();
        const double m = std::max(logits(0, 0), logits(0, 1));
        const double e0 = std::exp(logits(0, 0) - m), e1 = std::exp(logits(0, 1) - m);
        p.score_fake = e1 / (e0 + e1);
        p.pred_fake = logits(0, 1) > logits(0, 0) ? 1 : 0;
        p.pair_cosine = loss::cosine(out.emb_audio.value().row(0).transpose(),
                                     out.emb_visual.value().row(0).transpose());
        preds.push_back(std::move(p));
    }
    return preds;
}

EvalReport evaluate_predictions(const std::vector<Prediction>& preds) {
    if (preds.empty()) throw DataError("evaluate: no predictions");
    EvalReport r;
    r.n = static_cast<long>(preds.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.per_category_accuracy.fill(nan);
    r.mean_pair_cosine.fill(nan);

    std::array<long, 4> correct{};
    std::array<double, 4> cos_sum{};
    std::vector<double> scores;
    std::vector<int> labels;
    long hits = 0;
    for (const auto& p : preds) {
        ++r.confusion[p.label_fake][p.pred_fake];
        const int ci = category_index(p.category);
        ++r.per_category_count[static_cast<std::size_t>(ci)];
        cos_sum[static_cast<std::size_t>(ci)] += p.pair_cosine;
        if (p.pred_fake == p.label_fake) {
            ++hits;
            ++correct[static_cast<std::size_t>(ci)];
        }
        scores.push_back(p.score_fake);
        labels.push_back(p.label_fake);
    }
    r.accuracy = static_cast<double>(hits) / static_cast<double>(r.n);
    r.auc = auc_score(scores, labels);
    r.real_class = prf_for_class(r.confusion, 0);
    r.fake_class = prf_for_class(r.confusion, 1);
    for (std::size_t c = 0; c < 4; ++c) {
        if (r.per_category_count[c] > 0) {
            r.per_category_accuracy[c] = static_cast<double>(correct[c]) /
                                         static_cast<double>(r.per_category_count[c]);
            r.mean_pair_cosine[c] = cos_sum[c] / static_cast<double>(r.per_category_count[c]);
        }
    }
    return r;
}

EvalReport evaluate(Model& model, const std::vector<LoadedClip>& clips) {
    return evaluate_predictions(predict(model, clips));
}

void save_predictions(const std::vector<Prediction>& preds, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("cannot open predictions file for writing: " + path);
    os << "sample_id\tscore_fake\tpred\ty_m\tcategory\n";
    os.precision(17);
    for (const auto& p : preds)
        os << p.sample_id << '\t' << p.score_fake << '\t' << p.pred_fake << '\t' << p.label_fake
           << '\t' << category_name(p.category) << "\n";
    if (!os) throw DataError("failed writing predictions: " + path);
}

void write_report(std::ostream& os, const EvalReport& r, const std::string& prefix) {
    os.precision(6);
    os << std::fixed;
    os << prefix << "n " << r.n << "\n";
    os << prefix << "accuracy " << r.accuracy << "\n";
    os << prefix << "auc " << r.auc << "\n";
    os << prefix << "real.precision " << r.real_class.precision << "\n";
    os << prefix << "real.recall " << r.real_class.recall << "\n";
    os << prefix << "real.f1 " << r.real_class.f1 << "\n";
    os << prefix << "fake.precision " << r.fake_class.precision << "\n";
    os << prefix << "fake.recall " << r.fake_class.recall << "\n";
    os << prefix << "fake.f1 " << r.fake_class.f1 << "\n";
    for (Category c : kAllCategories) {
        const auto ci = static_cast<std::size_t>(category_index(c));
        os << prefix << "category." << category_name(c) << ".accuracy "
           << r.per_category_accuracy[ci] << "\n";
        os << prefix << "category." << category_name(c) << ".pair_cosine "
           << r.mean_pair_cosine[ci] << "\n";
    }
    os << prefix << "confusion.real_real " << r.confusion[0][0] << "\n";
    os << prefix << "confusion.real_fake " << r.confusion[0][1] << "\n";
    os << prefix << "confusion.fake_real " << r.confusion[1][0] << "\n";
    os << prefix << "confusion.fake_fake " << r.confusion[1][1] << "\n";
}

} // namespace mrdf
