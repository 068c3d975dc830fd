#include "mrdf/synthetic.hpp"

#include <filesystem>
#include <iomanip>
#include <sstream>

#include "mrdf/errors.hpp"
#include "mrdf/feature_io.hpp"
#include "mrdf/rng.hpp"

namespace fs = std::filesystem;

namespace mrdf {

namespace {

Mat gaussian_matrix(Rng& rng, int rows, int cols, double scale) {
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = scale * rng.gaussian();
    return m;
}

// Latent trajectory: per-clip base vector plus i.i.d. per-frame variation.
Mat trajectory(Rng& rng, const Vec& base, int frames, int dim, double jitter) {
    Mat z(frames, dim);
    for (int t = 0; t < frames; ++t)
        for (int d = 0; d < dim; ++d) z(t, d) = base(d) + jitter * rng.gaussian();
    return z;
}

} // namespace

void SynthSpec::validate() const {
    if (n_identities < 1) throw DataError("synth: n_identities must be >= 1");
    if (clips_per_category < 1) throw DataError("synth: clips_per_category must be >= 1");
    if (frames < 1) throw DataError("synth: frames must be >= 1");
    if (latent_dim < 1) throw DataError("synth: latent_dim must be >= 1");
    if (noise_scale < 0.0) throw DataError("synth: noise_scale must be >= 0");
    if (manipulation_shift < 0.0) throw DataError("synth: manipulation_shift must be >= 0");
    if (visual_shift_scale < 0.0) throw DataError("synth: visual_shift_scale must be >= 0");
    if (identity_scale < 0.0) throw DataError("synth: identity_scale must be >= 0");
    if (frame_jitter < 0.0) throw DataError("synth: frame_jitter must be >= 0");
}

Manifest generate_synthetic(const SynthSpec& spec, const std::string& out_dir) {
    spec.validate();

    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "features", ec);
    if (ec) throw DataError("cannot create output directory " + out_dir + ": " + ec.message());

    Rng rng(spec.seed);
    const int D = spec.latent_dim;

    // Fixed per-run mixing maps; scaled so feature variance stays O(1).
    const double mix_scale = 1.0 / std::sqrt(static_cast<double>(D));
    const Mat mix_audio = gaussian_matrix(rng, D, D, mix_scale);
    const Mat mix_visual = gaussian_matrix(rng, D, D, mix_scale);

    std::vector<Vec> identity_base(static_cast<std::size_t>(spec.n_identities));
    for (auto& u : identity_base) {
        u = Vec(D);
        for (int d = 0; d < D; ++d) u(d) = spec.identity_scale * rng.gaussian();
    }

    const Vec audio_shift = Vec::Constant(D, spec.manipulation_shift);
    const Vec visual_shift = Vec::Constant(D, spec.manipulation_shift * spec.visual_shift_scale);

    Manifest manifest;
    manifest.source = (fs::path(out_dir) / "manifest.tsv").string();

    // Category-major clip order so identities never lock to one category:
    // with clips_per_category >= n_identities every identity sees every
    // category.
    int counter = 0;
    for (Category cat : kAllCategories) {
        for (int rep = 0; rep < spec.clips_per_category; ++rep) {
            const int identity = counter % spec.n_identities;
            const LabelSet labels = labels_from_category(cat);

            const Mat shared = trajectory(rng, identity_base[static_cast<std::size_t>(identity)],
                                          spec.frames, D, spec.frame_jitter);

            Mat z_audio, z_visual;
            if (labels.fake_audio) {
                Vec fresh(D);
                for (int d = 0; d < D; ++d) fresh(d) = spec.identity_scale * rng.gaussian();
                z_audio = trajectory(rng, fresh, spec.frames, D, spec.frame_jitter);
                z_audio.rowwise() += audio_shift.transpose();
            } else {
                z_audio = shared;
            }
            if (labels.fake_visual) {
                Vec fresh(D);
                for (int d = 0; d < D; ++d) fresh(d) = spec.identity_scale * rng.gaussian();
                z_visual = trajectory(rng, fresh, spec.frames, D, spec.frame_jitter);
                z_visual.rowwise() += visual_shift.transpose();
            } else {
                z_visual = shared;
            }

            Mat feat_audio = z_audio * mix_audio.transpose();
            Mat feat_visual = z_visual * mix_visual.transpose();
            if (spec.noise_scale > 0.0) {
                feat_audio += gaussian_matrix(rng, spec.frames, D, spec.noise_scale);
                feat_visual += gaussian_matrix(rng, spec.frames, D, spec.noise_scale);
            } else {
                // Keep the draw pattern identical so seeds stay comparable
                // across noise settings.
                (void)gaussian_matrix(rng, spec.frames, D, 1.0);
                (void)gaussian_matrix(rng, spec.frames, D, 1.0);
            }

            std::ostringstream idos;
            idos << "clip_" << std::setw(6) << std::setfill('0') << counter;
            Sample s;
            s.id = idos.str();
            s.identity = "id_" + std::to_string(identity);
            s.category = cat;
            s.labels = labels;
            s.audio_ref = "features/" + s.id + "_a.bin";
            s.visual_ref = "features/" + s.id + "_v.bin";
            s.frames_audio = spec.frames;
            s.frames_visual = spec.frames;

            write_feature_matrix((fs::path(out_dir) / s.audio_ref).string(), feat_audio);
            write_feature_matrix((fs::path(out_dir) / s.visual_ref).string(), feat_visual);
            manifest.samples.push_back(std::move(s));
            ++counter;
        }
    }

    save_manifest(manifest, manifest.source);
    return manifest;
}

} // namespace mrdf
