#include "mrdf/crossval.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_map>

#include "mrdf/errors.hpp"

namespace fs = std::filesystem;

namespace mrdf {

namespace {

std::uint64_t fold_train_seed(std::uint64_t base, int fold) {
    return base * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(fold) + 1;
}

std::vector<LoadedClip> clips_by_ids(const std::vector<LoadedClip>& clips,
                                     const std::vector<std::string>& ids) {
    std::unordered_map<std::string, const LoadedClip*> by_id;
    for (const auto& c : clips) by_id[c.sample.id] = &c;
    std::vector<LoadedClip> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw DataError("fold references unknown sample id '" + id + "'");
        out.push_back(*it->second);
    }
    return out;
}

void assert_identity_disjoint(const std::vector<LoadedClip>& train,
                              const std::vector<LoadedClip>& test, int fold) {
    std::set<std::string> train_idents;
    for (const auto& c : train) train_idents.insert(c.sample.identity);
    for (const auto& c : test)
        if (train_idents.count(c.sample.identity))
            throw DataError("fold " + std::to_string(fold) + ": identity '" + c.sample.identity +
                            "' appears in both train and test");
}

double nan_safe(double v) { return std::isfinite(v) ? v : 0.0; }

} // namespace

EvalReport report_mean(const std::vector<EvalReport>& reports) {
    EvalReport m;
    const double inv = 1.0 / static_cast<double>(reports.size());
    for (const auto& r : reports) {
        m.n += r.n;
        m.accuracy += r.accuracy * inv;
        m.auc += r.auc * inv;
        m.real_class.precision += r.real_class.precision * inv;
        m.real_class.recall += r.real_class.recall * inv;
        m.real_class.f1 += r.real_class.f1 * inv;
        m.fake_class.precision += r.fake_class.precision * inv;
        m.fake_class.recall += r.fake_class.recall * inv;
        m.fake_class.f1 += r.fake_class.f1 * inv;
        for (std::size_t c = 0; c < 4; ++c) {
            m.per_category_accuracy[c] += nan_safe(r.per_category_accuracy[c]) * inv;
            m.mean_pair_cosine[c] += nan_safe(r.mean_pair_cosine[c]) * inv;
            m.per_category_count[c] += r.per_category_count[c];
        }
        for (int a = 0; a < 2; ++a)
            for (int p = 0; p < 2; ++p) m.confusion[a][p] += r.confusion[a][p];
    }
    return m;
}

EvalReport report_stddev(const std::vector<EvalReport>& reports, const EvalReport& mean) {
    EvalReport s;
    const double inv = 1.0 / static_cast<double>(reports.size());
    for (const auto& r : reports) {
        auto acc = [&](double v, double mu) { return (v - mu) * (v - mu) * inv; };
        s.accuracy += acc(r.accuracy, mean.accuracy);
        s.auc += acc(r.auc, mean.auc);
        s.real_class.precision += acc(r.real_class.precision, mean.real_class.precision);
        s.real_class.recall += acc(r.real_class.recall, mean.real_class.recall);
        s.real_class.f1 += acc(r.real_class.f1, mean.real_class.f1);
        s.fake_class.precision += acc(r.fake_class.precision, mean.fake_class.precision);
        s.fake_class.recall += acc(r.fake_class.recall, mean.fake_class.recall);
        s.fake_class.f1 += acc(r.fake_class.f1, mean.fake_class.f1);
        for (std::size_t c = 0; c < 4; ++c) {
            s.per_category_accuracy[c] +=
                acc(nan_safe(r.per_category_accuracy[c]), mean.per_category_accuracy[c]);
            s.mean_pair_cosine[c] +=
                acc(nan_safe(r.mean_pair_cosine[c]), mean.mean_pair_cosine[c]);
        }
    }
    auto root = [](double& v) { v = std::sqrt(v); };
    root(s.accuracy);
    root(s.auc);
    root(s.real_class.precision);
    root(s.real_class.recall);
    root(s.real_class.f1);
    root(s.fake_class.precision);
    root(s.fake_class.recall);
    root(s.fake_class.f1);
    for (std::size_t c = 0; c < 4; ++c) {
        root(s.per_category_accuracy[c]);
        root(s.mean_pair_cosine[c]);
    }
    return s;
}

CrossValReport cross_validate(const Manifest& manifest, const std::vector<LoadedClip>& clips,
                              const ModelConfig& model_config, const TrainConfig& train_config,
                              int k, std::uint64_t fold_seed, const std::string& out_dir) {
    CrossValReport report;
    report.plan = identity_kfold(manifest, k, fold_seed);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        save_fold_plan(report.plan, (fs::path(out_dir) / "fold_plan.tsv").string());
    }

    for (int f = 0; f < k; ++f) {
        const Fold& fold = report.plan.folds[static_cast<std::size_t>(f)];
        auto train_pool = clips_by_ids(clips, fold.train_ids);
        auto test_clips = clips_by_ids(clips, fold.test_ids);
        assert_identity_disjoint(train_pool, test_clips, f);

        TrainConfig tc = train_config;
        tc.seed = fold_train_seed(train_config.seed, f);
        auto [train_clips, val_clips] = split_validation(train_pool, tc.val_fraction, tc.seed);

        Model model(model_config, tc.seed);
        const std::string fold_dir =
            out_dir.empty() ? std::string{}
                            : (fs::path(out_dir) / ("fold_" + std::to_string(f))).string();
        TrainResult tr;
        try {
            tr = train_model(model, train_clips, val_clips, tc, fold_dir);
        } catch (const std::exception& e) {
            throw NumericError("fold " + std::to_string(f) + ": " + e.what());
        }

        auto preds = predict(model, test_clips);
        report.per_fold.push_back(evaluate_predictions(preds));
        report.per_fold_training.push_back(tr.state);
        if (!fold_dir.empty()) {
            save_predictions(preds, (fs::path(fold_dir) / "predictions.tsv").string());
            std::ofstream os(fs::path(fold_dir) / "report.txt");
            write_report(os, report.per_fold.back());
        }
    }

    report.mean = report_mean(report.per_fold);
    report.stddev = report_stddev(report.per_fold, report.mean);

    if (!out_dir.empty()) {
        std::ofstream os(fs::path(out_dir) / "crossval_report.txt");
        write_crossval_report(os, report);
        save_crossval_table(report, (fs::path(out_dir) / "crossval_report.tsv").string());
    }
    return report;
}

void write_crossval_report(std::ostream& os, const CrossValReport& r) {
    os << "folds " << r.per_fold.size() << "\n";
    for (std::size_t f = 0; f < r.per_fold.size(); ++f)
        write_report(os, r.per_fold[f], "fold" + std::to_string(f) + ".");
    write_report(os, r.mean, "mean.");
    write_report(os, r.stddev, "std.");
}

void save_crossval_table(const CrossValReport& r, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("cannot open crossval table for writing: " + path);
    os << "fold\taccuracy\tauc\treal_precision\treal_recall\treal_f1\tfake_precision\t"
          "fake_recall\tfake_f1\tacc_FAFV\tacc_FARV\tacc_RAFV\tacc_RARV\n";
    os.precision(6);
    os << std::fixed;
    auto row = [&](const std::string& tag, const EvalReport& e) {
        os << tag << '\t' << e.accuracy << '\t' << e.auc << '\t' << e.real_class.precision << '\t'
           << e.real_class.recall << '\t' << e.real_class.f1 << '\t' << e.fake_class.precision
           << '\t' << e.fake_class.recall << '\t' << e.fake_class.f1;
        for (std::size_t c = 0; c < 4; ++c) os << '\t' << e.per_category_accuracy[c];
        os << "\n";
    };
    for (std::size_t f = 0; f < r.per_fold.size(); ++f)
        row(std::to_string(f), r.per_fold[f]);
    row("mean", r.mean);
    row("std", r.stddev);
}

} // namespace mrdf
