#include "mrdf/selfcheck.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "mrdf/evaluation.hpp"
#include "mrdf/folds.hpp"
#include "mrdf/losses.hpp"
#include "mrdf/manifest.hpp"
#include "mrdf/rng.hpp"

namespace mrdf::selfcheck {

namespace {

Mat random_mat(Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = scale * rng.gaussian();
    return m;
}

std::vector<int> random_bits(Rng& rng, std::size_t n) {
    std::vector<int> v(n);
    for (auto& b : v) b = rng.uniform01() < 0.5 ? 1 : 0;
    return v;
}

double naive_cosine(const Eigen::RowVectorXd& u, const Eigen::RowVectorXd& v) {
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        dot += u(i) * v(i);
        nu += u(i) * u(i);
        nv += v(i) * v(i);
    }
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

double naive_cmr(const Mat& a, const Mat& v, const std::vector<int>& yc, loss::Reduction red) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double d = naive_cosine(a.row(i), v.row(i));
        total += yc[static_cast<std::size_t>(i)] ? (1.0 - d) : std::max(0.0, d);
    }
    return red == loss::Reduction::Sum ? total : total / static_cast<double>(a.rows());
}

double naive_wmr_margin(const Mat& e, const std::vector<int>& y, double alpha,
                        loss::Reduction red) {
    double total = 0.0;
    int pairs = 0;
    for (Eigen::Index i = 0; i < e.rows(); ++i)
        for (Eigen::Index j = i + 1; j < e.rows(); ++j) {
            const double d = naive_cosine(e.row(i), e.row(j));
            total += (y[static_cast<std::size_t>(i)] == y[static_cast<std::size_t>(j)])
                         ? (1.0 - d)
                         : std::max(0.0, d - alpha);
            ++pairs;
        }
    return red == loss::Reduction::Sum ? total : total / static_cast<double>(pairs);
}

double naive_ce(const Mat& logits, const std::vector<int>& y, loss::Reduction red) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        double denom = 0.0;
        for (Eigen::Index c = 0; c < logits.cols(); ++c) denom += std::exp(logits(i, c));
        total += -std::log(std::exp(logits(i, y[static_cast<std::size_t>(i)])) / denom);
    }
    return red == loss::Reduction::Sum ? total : total / static_cast<double>(logits.rows());
}

double naive_pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    long pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

double coord_rel_error(const Mat& a, const Mat& b) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        worst = std::max(worst,
                         std::abs(a(i) - b(i)) / std::max({1.0, std::abs(a(i)), std::abs(b(i))}));
    return worst;
}

Result fail(const std::string& name, const std::string& detail) {
    return {name, false, detail};
}

Result pass(const std::string& name, const std::string& detail = "") {
    return {name, true, detail};
}

} // namespace

Result check_loss_oracles(int n_batches, double tol) {
    const char* name = "loss-oracle-equivalence";
    Rng rng(101);
    double worst = 0.0;
    for (int it = 0; it < n_batches; ++it) {
        const auto b = static_cast<Eigen::Index>(2 + rng.below(31)); // B <= 32
        const auto d = static_cast<Eigen::Index>(1 + rng.below(64)); // D <= 64
        const Mat ea = random_mat(rng, b, d);
        const Mat ev = random_mat(rng, b, d);
        const Mat logits = random_mat(rng, b, 2, 2.0);
        const auto yc = random_bits(rng, static_cast<std::size_t>(b));
        const auto yn = random_bits(rng, static_cast<std::size_t>(b));
        const double alpha = rng.uniform(-0.5, 0.5);
        for (loss::Reduction red : {loss::Reduction::Mean, loss::Reduction::Sum}) {
            worst = std::max(worst, std::abs(loss::cross_modality_loss_value(ea, ev, yc, {}, red) -
                                             naive_cmr(ea, ev, yc, red)));
            worst = std::max(worst,
                             std::abs(loss::within_modality_margin_loss_value(ea, yn, alpha, red) -
                                      naive_wmr_margin(ea, yn, alpha, red)));
            worst = std::max(worst, std::abs(loss::cross_entropy_loss_value(logits, yn, red) -
                                             naive_ce(logits, yn, red)));
            // l_ce shares the softmax cross-entropy kernel with the
            // within-modality CE branch; exercised on separate draws anyway.
            worst = std::max(worst, std::abs(loss::cross_entropy_loss_value(logits, yc, red) -
                                             naive_ce(logits, yc, red)));
        }
    }
    std::ostringstream os;
    os << "worst |impl - oracle| = " << worst << " over " << n_batches << " batches";
    return worst <= tol ? pass(name, os.str()) : fail(name, os.str());
}

Result check_loss_gradients(int n_instances, double step, double tol) {
    const char* name = "loss-gradient-finite-differences";
    Rng rng(202);
    double worst = 0.0;

    auto fd_check = [&](auto&& value_fn, const std::vector<Mat>& inputs,
                        const std::vector<Mat>& analytic) {
        std::vector<Mat> work = inputs;
        for (std::size_t k = 0; k < work.size(); ++k) {
            Mat g(work[k].rows(), work[k].cols());
            for (Eigen::Index i = 0; i < work[k].size(); ++i) {
                const double keep = work[k](i);
                work[k](i) = keep + step;
                const double up = value_fn(work);
                work[k](i) = keep - step;
                const double dn = value_fn(work);
                work[k](i) = keep;
                g(i) = (up - dn) / (2.0 * step);
            }
            worst = std::max(worst, coord_rel_error(analytic[k], g));
        }
    };

    for (int it = 0; it < n_instances; ++it) {
        const auto b = static_cast<Eigen::Index>(2 + rng.below(7));
        const auto d = static_cast<Eigen::Index>(2 + rng.below(7));
        const auto yc = random_bits(rng, static_cast<std::size_t>(b));
        const auto yn = random_bits(rng, static_cast<std::size_t>(b));
        const double alpha = 0.1;

        // cosine (via the pairing term on one row pair)
        {
            std::vector<Mat> ins = {random_mat(rng, 1, d), random_mat(rng, 1, d)};
            ad::Tape t;
            ad::Var u = t.leaf(ins[0], true), v = t.leaf(ins[1], true);
            t.backward(ad::sum_all(ad::cosine_rows(u, v)));
            fd_check(
                [](const std::vector<Mat>& m) {
                    ad::Tape tt;
                    return ad::sum_all(ad::cosine_rows(tt.constant(m[0]), tt.constant(m[1])))
                        .scalar();
                },
                ins, {u.grad(), v.grad()});
        }
        // cross-modality pairing loss; redraw while any similarity sits on
        // the hinge kink
        {
            std::vector<Mat> ins;
            for (int tries = 0; tries < 100; ++tries) {
                ins = {random_mat(rng, b, d), random_mat(rng, b, d)};
                bool near_kink = false;
                for (Eigen::Index i = 0; i < b; ++i)
                    near_kink |= std::abs(naive_cosine(ins[0].row(i), ins[1].row(i))) < 1e-3;
                if (!near_kink) break;
            }
            ad::Tape t;
            ad::Var ea = t.leaf(ins[0], true), ev = t.leaf(ins[1], true);
            t.backward(loss::cross_modality_loss(ea, ev, yc, {}, loss::Reduction::Mean));
            fd_check(
                [&](const std::vector<Mat>& m) {
                    return loss::cross_modality_loss_value(m[0], m[1], yc, {},
                                                           loss::Reduction::Mean);
                },
                ins, {ea.grad(), ev.grad()});
        }
        // within-modality margin loss
        {
            std::vector<Mat> ins;
            for (int tries = 0; tries < 100; ++tries) {
                ins = {random_mat(rng, b, d)};
                bool near_kink = false;
                for (Eigen::Index i = 0; i < b; ++i)
                    for (Eigen::Index j = i + 1; j < b; ++j)
                        near_kink |=
                            std::abs(naive_cosine(ins[0].row(i), ins[0].row(j)) - alpha) < 1e-3;
                if (!near_kink) break;
            }
            ad::Tape t;
            ad::Var e = t.leaf(ins[0], true);
            t.backward(loss::within_modality_margin_loss(e, yn, alpha, loss::Reduction::Mean));
            fd_check(
                [&](const std::vector<Mat>& m) {
                    return loss::within_modality_margin_loss_value(m[0], yn, alpha,
                                                                   loss::Reduction::Mean);
                },
                ins, {e.grad()});
        }
        // softmax cross-entropy, on both the detection head and the unimodal
        // target labels
        for (const auto& labels : {yn, yc}) {
            std::vector<Mat> ins = {random_mat(rng, b, 2, 2.0)};
            ad::Tape t;
            ad::Var l = t.leaf(ins[0], true);
            t.backward(loss::cross_entropy_loss(l, labels, loss::Reduction::Mean));
            fd_check(
                [&](const std::vector<Mat>& m) {
                    return loss::cross_entropy_loss_value(m[0], labels, loss::Reduction::Mean);
                },
                ins, {l.grad()});
        }
        // weighted total through all terms at once
        {
            std::vector<Mat> ins = {random_mat(rng, b, d), random_mat(rng, b, d),
                                    random_mat(rng, b, 2, 2.0)};
            loss::WeightConfig w;
            w.ce = 0.7;
            w.cmr = 1.3;
            w.wmr = 0.9;
            auto build = [&](ad::Tape& t, ad::Var ea, ad::Var ev, ad::Var lg) {
                ad::Var ce = loss::cross_entropy_loss(lg, yn, loss::Reduction::Mean);
                ad::Var cmr = loss::cross_modality_loss(ea, ev, yc, {}, loss::Reduction::Mean);
                ad::Var wa =
                    loss::within_modality_margin_loss(ea, yn, alpha, loss::Reduction::Mean);
                ad::Var wv =
                    loss::within_modality_margin_loss(ev, yc, alpha, loss::Reduction::Mean);
                return loss::total_loss(t, ce, cmr, wa, wv, w).total;
            };
            ad::Tape t;
            ad::Var ea = t.leaf(ins[0], true), ev = t.leaf(ins[1], true),
                    lg = t.leaf(ins[2], true);
            t.backward(build(t, ea, ev, lg));
            fd_check(
                [&](const std::vector<Mat>& m) {
                    ad::Tape tt;
                    return build(tt, tt.constant(m[0]), tt.constant(m[1]), tt.constant(m[2]))
                        .scalar();
                },
                ins, {ea.grad(), ev.grad(), lg.grad()});
        }
    }
    std::ostringstream os;
    os << "worst relative gradient error = " << worst << " over " << n_instances
       << " instances per loss";
    return worst <= tol ? pass(name, os.str()) : fail(name, os.str());
}

Result check_auc_oracle(int n_sets, double tol) {
    const char* name = "auc-pairwise-oracle";
    Rng rng(303);
    double worst = 0.0;
    for (int it = 0; it < n_sets; ++it) {
        const std::size_t n = 2 + rng.below(999);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        bool has0 = false, has1 = false;
        for (std::size_t i = 0; i < n; ++i) {
            // quantized scores so ties actually occur
            scores[i] = std::round(rng.uniform01() * 50.0) / 50.0;
            labels[i] = rng.uniform01() < 0.4 ? 1 : 0;
            has0 |= labels[i] == 0;
            has1 |= labels[i] == 1;
        }
        if (!has0) labels[0] = 0;
        if (!has1) labels[n - 1] = 1;
        worst = std::max(worst,
                         std::abs(auc_score(scores, labels) - naive_pairwise_auc(scores, labels)));
    }
    std::ostringstream os;
    os << "worst |auc - oracle| = " << worst << " over " << n_sets << " score sets";
    return worst <= tol ? pass(name, os.str()) : fail(name, os.str());
}

Result check_label_algebra() {
    const char* name = "label-algebra";
    const LabelSet expect[4] = {{1, 1, 1, 0}, {1, 1, 0, 0}, {1, 0, 1, 0}, {0, 0, 0, 1}};
    for (std::size_t i = 0; i < 4; ++i) {
        const LabelSet got = labels_from_category(kAllCategories[i]);
        if (!(got == expect[i]))
            return fail(name, std::string("mismatch for ") + category_name(kAllCategories[i]));
        if (got.fake != ((got.fake_audio || got.fake_visual) ? 1 : 0))
            return fail(name, "fake != OR(fake_audio, fake_visual)");
        if (got.paired != ((!got.fake_audio && !got.fake_visual) ? 1 : 0))
            return fail(name, "paired != AND(!fake_audio, !fake_visual)");
    }
    return pass(name, "4-row truth table exact");
}

Result check_protocol_properties(int n_manifests) {
    const char* name = "protocol-properties";
    Rng rng(404);
    for (int it = 0; it < n_manifests; ++it) {
        Manifest m;
        const int n_idents = 4 + static_cast<int>(rng.below(20));
        const int clips = n_idents * (1 + static_cast<int>(rng.below(6)));
        for (int c = 0; c < clips; ++c) {
            Sample s;
            s.id = "c" + std::to_string(c);
            s.identity = "p" + std::to_string(rng.below(static_cast<std::uint64_t>(n_idents)));
            s.category = kAllCategories[c % 4];
            s.labels = labels_from_category(s.category);
            s.frames_audio = s.frames_visual = 2;
            m.samples.push_back(s);
        }
        const int k = 2 + static_cast<int>(rng.below(3));
        std::set<std::string> present;
        for (const auto& s : m.samples) present.insert(s.identity);
        if (static_cast<int>(present.size()) < k) continue;

        const std::uint64_t seed = rng.raw();
        const FoldPlan plan = identity_kfold(m, k, seed);
        const FoldPlan again = identity_kfold(m, k, seed);

        std::set<std::string> covered;
        for (int f = 0; f < k; ++f) {
            const auto& fold = plan.folds[static_cast<std::size_t>(f)];
            if (fold.train_ids != again.folds[static_cast<std::size_t>(f)].train_ids)
                return fail(name, "fold plan not deterministic under seed");
            std::set<std::string> train_idents, test_idents;
            for (const auto& s : m.samples) {
                const bool in_test =
                    std::find(fold.test_ids.begin(), fold.test_ids.end(), s.id) !=
                    fold.test_ids.end();
                (in_test ? test_idents : train_idents).insert(s.identity);
            }
            for (const auto& i : test_idents)
                if (train_idents.count(i))
                    return fail(name, "identity leak in fold " + std::to_string(f));
            covered.insert(fold.test_ids.begin(), fold.test_ids.end());
        }
        if (covered.size() != m.samples.size())
            return fail(name, "test folds do not cover all samples");
    }

    // balanced sampling: uniform histogram, deterministic under seed
    Rng rng2(505);
    for (int it = 0; it < 20; ++it) {
        Manifest m;
        int n = 0;
        for (Category cat : kAllCategories) {
            const int count = 30 + static_cast<int>(rng2.below(40));
            for (int c = 0; c < count; ++c) {
                Sample s;
                s.id = "c" + std::to_string(n++);
                s.identity = "p" + std::to_string(n % 9);
                s.category = cat;
                s.labels = labels_from_category(cat);
                s.frames_audio = s.frames_visual = 2;
                m.samples.push_back(s);
            }
        }
        const std::uint64_t seed = rng2.raw();
        const Manifest b1 = balanced_subset(m, 25, seed);
        const Manifest b2 = balanced_subset(m, 25, seed);
        if (b1.size() != 100) return fail(name, "balanced subset size wrong");
        for (auto& [cat, count] : b1.category_counts())
            if (count != 25) return fail(name, "balanced subset histogram not uniform");
        for (std::size_t i = 0; i < b1.size(); ++i)
            if (b1.samples[i].id != b2.samples[i].id)
                return fail(name, "balanced subset not deterministic under seed");
    }
    return pass(name, std::to_string(n_manifests) + " random manifests checked");
}

std::vector<Result> run_all() {
    return {check_loss_oracles(), check_loss_gradients(), check_auc_oracle(),
            check_label_algebra(), check_protocol_properties()};
}

} // namespace mrdf::selfcheck
