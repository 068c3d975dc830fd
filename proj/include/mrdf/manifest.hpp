#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mrdf/types.hpp"

namespace mrdf {

// Ordered list of samples parsed from a tab-separated manifest file.
// Schema (header line required):
//   id	identity	category	audio_ref	visual_ref	t_a	t_v
struct Manifest {
    std::vector<Sample> samples;
    std::string source;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    std::map<Category, std::size_t> category_counts() const;
    std::vector<std::string> identities() const; // distinct, sorted
};

Manifest load_manifest(const std::string& path);
void save_manifest(const Manifest& m, const std::string& path);

// Uniform random subset with exactly per_category samples of each category,
// deterministic under seed. Output preserves manifest order. Throws DataError
// naming the first deficient category.
Manifest balanced_subset(const Manifest& m, std::size_t per_category, std::uint64_t seed);

// Restrict to the given sample ids, preserving manifest order.
Manifest subset_by_ids(const Manifest& m, const std::vector<std::string>& ids);

} // namespace mrdf
