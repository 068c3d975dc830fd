#include <doctest.h>

#include <cmath>
#include <complex>

#include "mrdf/errors.hpp"
#include "mrdf/frontend.hpp"
#include "mrdf/rng.hpp"

using namespace mrdf;

TEST_CASE("align stacks audio blocks and truncates to the shorter stream") {
    Rng rng(1);
    Mat audio(100, 3), visual(25, 7);
    for (Eigen::Index i = 0; i < audio.size(); ++i) audio(i) = rng.gaussian();
    for (Eigen::Index i = 0; i < visual.size(); ++i) visual(i) = rng.gaussian();

    AlignedClip clip = align(audio, visual, 4);
    CHECK(clip.frames() == 25); // floor(100/4) = 25
    CHECK(clip.audio.cols() == 12);
    CHECK(clip.visual.cols() == 7);
    // block i concatenates audio rows 4i..4i+3 feature-wise
    for (int j = 0; j < 4; ++j)
        CHECK(clip.audio.block(5, j * 3, 1, 3) == audio.row(5 * 4 + j));
}

TEST_CASE("ratio 1 with equal lengths is the identity") {
    Rng rng(2);
    Mat audio(7, 2), visual(7, 5);
    for (Eigen::Index i = 0; i < audio.size(); ++i) audio(i) = rng.gaussian();
    for (Eigen::Index i = 0; i < visual.size(); ++i) visual(i) = rng.gaussian();
    AlignedClip clip = align(audio, visual, 1);
    CHECK(clip.frames() == 7);
    CHECK((clip.audio - audio).cwiseAbs().maxCoeff() == 0.0);
    CHECK((clip.visual - visual).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("align output never exceeds either input length") {
    Rng rng(3);
    for (int it = 0; it < 20; ++it) {
        const auto ta = static_cast<Eigen::Index>(1 + rng.below(40));
        const auto tv = static_cast<Eigen::Index>(1 + rng.below(40));
        const int ratio = static_cast<int>(1 + rng.below(5));
        if (ta < ratio) continue;
        AlignedClip clip = align(Mat::Zero(ta, 2), Mat::Zero(tv, 2), ratio);
        CHECK(clip.audio.rows() == clip.visual.rows());
        CHECK(clip.frames() <= tv);
        CHECK(clip.frames() * ratio <= ta);
    }
}

TEST_CASE("audio shorter than one block is rejected") {
    CHECK_THROWS_AS(align(Mat::Zero(3, 2), Mat::Zero(5, 2), 4), DataError);
    CHECK_THROWS_AS(align(Mat::Zero(0, 2), Mat::Zero(5, 2), 1), DataError);
}

TEST_CASE("logmel concentrates a pure tone at the expected mel band") {
    const double fs = 16000.0;
    const double f0 = 1000.0;
    std::vector<double> wave(static_cast<std::size_t>(fs * 0.3));
    for (std::size_t i = 0; i < wave.size(); ++i)
        wave[i] = std::sin(2.0 * M_PI * f0 * static_cast<double>(i) / fs);

    FrontendConfig cfg;
    cfg.n_mels = 40;
    Mat mel = logmel(wave, fs, cfg);
    CHECK(mel.rows() > 10);
    CHECK(mel.cols() == 40);

    // the argmax band should correspond to roughly 1 kHz
    Eigen::Index band;
    mel.colwise().mean().maxCoeff(&band);
    auto hz_to_mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
    const double mel_hi = hz_to_mel(fs / 2.0);
    const double band_center_mel = mel_hi * static_cast<double>(band + 1) / (40.0 + 1.0);
    const double band_center_hz = 700.0 * (std::pow(10.0, band_center_mel / 2595.0) - 1.0);
    CHECK(band_center_hz > 700.0);
    CHECK(band_center_hz < 1400.0);
}

TEST_CASE("logmel rejects degenerate input") {
    FrontendConfig cfg;
    CHECK_THROWS_AS(logmel({}, 16000.0, cfg), DataError);
    CHECK_THROWS_AS(logmel(std::vector<double>(10, 0.0), 16000.0, cfg), DataError);
}
