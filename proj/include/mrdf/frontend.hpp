#pragma once

#include <vector>

#include "mrdf/types.hpp"

namespace mrdf {

// Equal-length audio/visual frame streams ready for the encoders.
struct AlignedClip {
    Mat audio;  // [T x d_a_in]
    Mat visual; // [T x d_v_in]
    int frames() const { return static_cast<int>(audio.rows()); }
};

struct FrontendConfig {
    // Audio frames per visual frame; consecutive audio frames are stacked
    // feature-wise in blocks of this size (100 Hz audio vs 25 fps video -> 4).
    int ratio = 4;
    int n_mels = 80;
    double hop_ms = 10.0;
    double win_ms = 25.0;
};

// Groups audio frames into blocks of `ratio`, concatenated feature-wise, then
// truncates both streams to T = min(floor(T_a / ratio), T_v).
AlignedClip align(const Mat& audio, const Mat& visual, int ratio);

// Log-mel filterbank frames from a mono waveform, for users bringing raw
// audio. Hann window, power spectrum, HTK mel triangles, log(x + 1e-10).
Mat logmel(const std::vector<double>& waveform, double sample_rate_hz,
           const FrontendConfig& cfg);

} // namespace mrdf
