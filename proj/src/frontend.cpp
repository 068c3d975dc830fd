#include "mrdf/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "mrdf/errors.hpp"

namespace mrdf {

AlignedClip align(const Mat& audio, const Mat& visual, int ratio) {
    if (ratio < 1) throw DataError("align: ratio must be >= 1");
    if (audio.rows() == 0 || visual.rows() == 0) throw DataError("align: empty input stream");
    if (audio.rows() < ratio)
        throw DataError("align: audio stream shorter than one block (" +
                        std::to_string(audio.rows()) + " < " + std::to_string(ratio) + ")");

    const Eigen::Index blocks = audio.rows() / ratio;
    const Eigen::Index t = std::min<Eigen::Index>(blocks, visual.rows());
    const Eigen::Index d = audio.cols();

    AlignedClip clip;
    clip.audio.resize(t, d * ratio);
    for (Eigen::Index i = 0; i < t; ++i)
        for (int j = 0; j < ratio; ++j)
            clip.audio.block(i, j * d, 1, d) = audio.row(i * ratio + j);
    clip.visual = visual.topRows(t);
    return clip;
}

namespace {

// Iterative radix-2 FFT; n must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

} // namespace

Mat logmel(const std::vector<double>& waveform, double sample_rate_hz, const FrontendConfig& cfg) {
    if (waveform.empty()) throw DataError("logmel: empty waveform");
    if (cfg.n_mels < 1) throw DataError("logmel: n_mels must be >= 1");

    const int win = static_cast<int>(std::lround(cfg.win_ms * 1e-3 * sample_rate_hz));
    const int hop = static_cast<int>(std::lround(cfg.hop_ms * 1e-3 * sample_rate_hz));
    if (win < 2 || hop < 1) throw DataError("logmel: window or hop too small for sample rate");
    if (static_cast<int>(waveform.size()) < win)
        throw DataError("logmel: waveform shorter than one window");

    std::size_t nfft = 1;
    while (nfft < static_cast<std::size_t>(win)) nfft <<= 1;
    const std::size_t nbins = nfft / 2 + 1;

    std::vector<double> window(static_cast<std::size_t>(win));
    for (int i = 0; i < win; ++i)
        window[static_cast<std::size_t>(i)] =
            0.5 - 0.5 * std::cos(2.0 * M_PI * i / (win - 1));

    // Triangular mel filters over the power spectrum bins.
    const double mel_lo = hz_to_mel(0.0);
    const double mel_hi = hz_to_mel(sample_rate_hz / 2.0);
    std::vector<double> centers_hz(static_cast<std::size_t>(cfg.n_mels) + 2);
    for (int m = 0; m < cfg.n_mels + 2; ++m)
        centers_hz[static_cast<std::size_t>(m)] =
            mel_to_hz(mel_lo + (mel_hi - mel_lo) * m / (cfg.n_mels + 1));
    Mat filters = Mat::Zero(cfg.n_mels, static_cast<Eigen::Index>(nbins));
    for (int m = 0; m < cfg.n_mels; ++m) {
        const double lo = centers_hz[static_cast<std::size_t>(m)];
        const double mid = centers_hz[static_cast<std::size_t>(m) + 1];
        const double hi = centers_hz[static_cast<std::size_t>(m) + 2];
        for (std::size_t b = 0; b < nbins; ++b) {
            const double hz = static_cast<double>(b) * sample_rate_hz / static_cast<double>(nfft);
            if (hz > lo && hz < mid)
                filters(m, static_cast<Eigen::Index>(b)) = (hz - lo) / (mid - lo);
            else if (hz >= mid && hz < hi)
                filters(m, static_cast<Eigen::Index>(b)) = (hi - hz) / (hi - mid);
        }
    }

    const int n_frames = 1 + (static_cast<int>(waveform.size()) - win) / hop;
    Mat out(n_frames, cfg.n_mels);
    std::vector<std::complex<double>> buf(nfft);
    for (int f = 0; f < n_frames; ++f) {
        std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
        const int off = f * hop;
        for (int i = 0; i < win; ++i)
            buf[static_cast<std::size_t>(i)] =
                waveform[static_cast<std::size_t>(off + i)] * window[static_cast<std::size_t>(i)];
        fft_inplace(buf);
        Vec power(static_cast<Eigen::Index>(nbins));
        for (std::size_t b = 0; b < nbins; ++b) power(static_cast<Eigen::Index>(b)) = std::norm(buf[b]);
        Vec mel = filters * power;
        for (int m = 0; m < cfg.n_mels; ++m) out(f, m) = std::log(mel(m) + 1e-10);
    }
    return out;
}

} // namespace mrdf
