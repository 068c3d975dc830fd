#pragma once

#include <cstdint>
#include <string>

#include "mrdf/manifest.hpp"

namespace mrdf {

// Synthetic audio-visual data for desk-scale experiments. Every real modality
// of a clip is a fixed linear mixture of one shared latent trajectory, so
// genuine pairs are cross-modally correlated. A manipulated modality swaps in
// an independent trajectory plus a constant mean shift: that breaks the
// pairing signal and moves the unimodal marginal, so both the pairing loss and
// the per-modality losses have something to learn.
struct SynthSpec {
    int n_identities = 10;
    int clips_per_category = 5;
    int frames = 8;
    int latent_dim = 16;
    double noise_scale = 0.1;
    double manipulation_shift = 1.0;
    // Visual manipulations shift less than audio ones by this factor, making
    // fake-video-only clips the harder category, as in real corpora.
    double visual_shift_scale = 0.6;
    // Strength of the per-identity (and per-fake-clip) latent base vector
    // relative to the per-frame variation. Zero removes identity signatures
    // from the features while keeping identities for fold grouping.
    double identity_scale = 1.0;
    // Within-clip trajectory variation around the base; smaller values make
    // the cross-modal pairing statistic subtler.
    double frame_jitter = 1.0;
    std::uint64_t seed = 0;

    void validate() const; // throws DataError on bad counts
};

// Writes feature files under <out_dir>/features/ and a manifest at
// <out_dir>/manifest.tsv, both deterministic under spec.seed. Returns the
// manifest (with source set so relative refs resolve).
Manifest generate_synthetic(const SynthSpec& spec, const std::string& out_dir);

} // namespace mrdf
