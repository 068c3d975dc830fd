#include "mrdf/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "mrdf/errors.hpp"
#include "mrdf/rng.hpp"

namespace mrdf {

namespace {

const char* kHeader = "id\tidentity\tcategory\taudio_ref\tvisual_ref\tt_a\tt_v";

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, '\t')) out.push_back(field);
    if (!line.empty() && line.back() == '\t') out.emplace_back();
    return out;
}

int parse_count(const std::string& s, const std::string& what, std::size_t row) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size() || v < 1) throw std::invalid_argument("range");
        return static_cast<int>(v);
    } catch (const std::exception&) {
        throw DataError("manifest row " + std::to_string(row) + ": bad " + what + " '" + s + "'");
    }
}

} // namespace

std::map<Category, std::size_t> Manifest::category_counts() const {
    std::map<Category, std::size_t> counts;
    for (Category c : kAllCategories) counts[c] = 0;
    for (const auto& s : samples) ++counts[s.category];
    return counts;
}

std::vector<std::string> Manifest::identities() const {
    std::set<std::string> ids;
    for (const auto& s : samples) ids.insert(s.identity);
    return {ids.begin(), ids.end()};
}

Manifest load_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open manifest: " + path);

    Manifest m;
    m.source = path;

    std::string line;
    if (!std::getline(is, line)) throw DataError("empty manifest: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader)
        throw DataError("manifest header mismatch in " + path + " (expected '" + kHeader + "')");

    std::unordered_set<std::string> seen_ids;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() != 7)
            throw DataError("manifest row " + std::to_string(row) + ": expected 7 fields, got " +
                            std::to_string(fields.size()));
        Sample s;
        s.id = fields[0];
        s.identity = fields[1];
        if (s.id.empty() || s.identity.empty())
            throw DataError("manifest row " + std::to_string(row) + ": empty id or identity");
        try {
            s.category = category_from_name(fields[2]);
        } catch (const DataError& e) {
            throw DataError("manifest row " + std::to_string(row) + ": " + e.what());
        }
        s.labels = labels_from_category(s.category);
        s.audio_ref = fields[3];
        s.visual_ref = fields[4];
        s.frames_audio = parse_count(fields[5], "t_a", row);
        s.frames_visual = parse_count(fields[6], "t_v", row);
        if (!seen_ids.insert(s.id).second)
            throw DataError("manifest row " + std::to_string(row) + ": duplicate id '" + s.id + "'");
        m.samples.push_back(std::move(s));
    }
    return m;
}

void save_manifest(const Manifest& m, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("cannot open manifest for writing: " + path);
    os << kHeader << "\n";
    for (const auto& s : m.samples) {
        os << s.id << '\t' << s.identity << '\t' << category_name(s.category) << '\t'
           << s.audio_ref << '\t' << s.visual_ref << '\t' << s.frames_audio << '\t'
           << s.frames_visual << "\n";
    }
    if (!os) throw DataError("failed writing manifest: " + path);
}

Manifest balanced_subset(const Manifest& m, std::size_t per_category, std::uint64_t seed) {
    std::map<Category, std::vector<std::size_t>> by_cat;
    for (std::size_t i = 0; i < m.samples.size(); ++i)
        by_cat[m.samples[i].category].push_back(i);

    for (Category c : kAllCategories) {
        if (by_cat[c].size() < per_category)
            throw DataError(std::string("insufficient samples for category ") + category_name(c) +
                            ": have " + std::to_string(by_cat[c].size()) + ", need " +
                            std::to_string(per_category));
    }

    Rng rng(seed);
    std::vector<char> keep(m.samples.size(), 0);
    for (Category c : kAllCategories) {
        auto& idx = by_cat[c];
        Rng cat_rng = rng.fork(static_cast<std::uint64_t>(category_index(c)));
        cat_rng.shuffle(idx);
        for (std::size_t i = 0; i < per_category; ++i) keep[idx[i]] = 1;
    }

    Manifest out;
    out.source = m.source;
    for (std::size_t i = 0; i < m.samples.size(); ++i)
        if (keep[i]) out.samples.push_back(m.samples[i]);
    return out;
}

Manifest subset_by_ids(const Manifest& m, const std::vector<std::string>& ids) {
    std::unordered_set<std::string> want(ids.begin(), ids.end());
    Manifest out;
    out.source = m.source;
    for (const auto& s : m.samples)
        if (want.count(s.id)) out.samples.push_back(s);
    return out;
}

} // namespace mrdf
