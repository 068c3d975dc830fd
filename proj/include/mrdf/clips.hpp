#pragma once

#include <string>
#include <vector>

#include "mrdf/frontend.hpp"
#include "mrdf/manifest.hpp"

namespace mrdf {

// A manifest sample with its aligned feature payload in memory.
struct LoadedClip {
    Sample sample;
    AlignedClip features;
};

// Reads the referenced feature files (relative refs resolve against the
// manifest's directory), validates frame counts against the manifest, and
// aligns the streams at the given ratio. Missing or malformed feature files
// fail here, not at manifest parse.
LoadedClip load_clip(const Manifest& m, const Sample& s, int ratio);
std::vector<LoadedClip> load_all_clips(const Manifest& m, int ratio);

} // namespace mrdf
