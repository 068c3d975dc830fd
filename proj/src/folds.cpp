#include "mrdf/folds.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "mrdf/errors.hpp"
#include "mrdf/rng.hpp"

namespace mrdf {

FoldPlan identity_kfold(const Manifest& m, int k, std::uint64_t seed) {
    if (k < 2) throw DataError("identity k-fold requires k >= 2, got " + std::to_string(k));
    auto identities = m.identities();
    if (identities.size() < static_cast<std::size_t>(k))
        throw DataError("fewer identities (" + std::to_string(identities.size()) +
                        ") than folds (" + std::to_string(k) + ")");

    Rng rng(seed);
    rng.shuffle(identities);

    // Contiguous near-equal chunks: fold sizes differ by at most one.
    std::unordered_map<std::string, int> fold_of;
    const std::size_t n = identities.size();
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        const std::size_t len = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        for (std::size_t i = 0; i < len; ++i) fold_of[identities[pos++]] = f;
    }

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.folds.resize(static_cast<std::size_t>(k));
    for (const auto& s : m.samples) {
        const int f = fold_of.at(s.identity);
        for (int g = 0; g < k; ++g) {
            if (g == f)
                plan.folds[static_cast<std::size_t>(g)].test_ids.push_back(s.id);
            else
                plan.folds[static_cast<std::size_t>(g)].train_ids.push_back(s.id);
        }
    }
    return plan;
}

void save_fold_plan(const FoldPlan& p, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("cannot open fold plan for writing: " + path);
    os << "fold\tsplit\tsample_id\n";
    for (std::size_t f = 0; f < p.folds.size(); ++f) {
        for (const auto& id : p.folds[f].train_ids) os << f << "\ttrain\t" << id << "\n";
        for (const auto& id : p.folds[f].test_ids) os << f << "\ttest\t" << id << "\n";
    }
    if (!os) throw DataError("failed writing fold plan: " + path);
}

FoldPlan load_fold_plan(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open fold plan: " + path);
    std::string line;
    if (!std::getline(is, line) || line.rfind("fold\tsplit\tsample_id", 0) != 0)
        throw DataError("bad fold plan header in " + path);

    FoldPlan plan;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string fold_s, split, id;
        if (!std::getline(ls, fold_s, '\t') || !std::getline(ls, split, '\t') ||
            !std::getline(ls, id, '\t'))
            throw DataError("fold plan row " + std::to_string(row) + ": expected 3 fields");
        std::size_t f = 0;
        try {
            f = static_cast<std::size_t>(std::stoul(fold_s));
        } catch (const std::exception&) {
            throw DataError("fold plan row " + std::to_string(row) + ": bad fold index");
        }
        if (plan.folds.size() <= f) plan.folds.resize(f + 1);
        if (split == "train")
            plan.folds[f].train_ids.push_back(id);
        else if (split == "test")
            plan.folds[f].test_ids.push_back(id);
        else
            throw DataError("fold plan row " + std::to_string(row) + ": bad split '" + split + "'");
    }
    plan.k = static_cast<int>(plan.folds.size());
    return plan;
}

} // namespace mrdf
