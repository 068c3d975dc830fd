#include "mrdf/clips.hpp"

#include <filesystem>

#include "mrdf/errors.hpp"
#include "mrdf/feature_io.hpp"

namespace fs = std::filesystem;

namespace mrdf {

namespace {

std::string resolve_ref(const Manifest& m, const std::string& ref) {
    fs::path p(ref);
    if (p.is_absolute()) return ref;
    return (fs::path(m.source).parent_path() / p).string();
}

} // namespace

LoadedClip load_clip(const Manifest& m, const Sample& s, int ratio) {
    const Mat audio = read_feature_matrix(resolve_ref(m, s.audio_ref));
    const Mat visual = read_feature_matrix(resolve_ref(m, s.visual_ref));
    if (audio.rows() != s.frames_audio)
        throw DataError("clip " + s.id + ": audio frames " + std::to_string(audio.rows()) +
                        " do not match manifest t_a " + std::to_string(s.frames_audio));
    if (visual.rows() != s.frames_visual)
        throw DataError("clip " + s.id + ": visual frames " + std::to_string(visual.rows()) +
                        " do not match manifest t_v " + std::to_string(s.frames_visual));
    LoadedClip clip;
    clip.sample = s;
    clip.features = align(audio, visual, ratio);
    return clip;
}

std::vector<LoadedClip> load_all_clips(const Manifest& m, int ratio) {
    std::vector<LoadedClip> out;
    out.reserve(m.samples.size());
    for (const auto& s : m.samples) out.push_back(load_clip(m, s, ratio));
    return out;
}

} // namespace mrdf
