#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "fd_check.hpp"
#include "mrdf/errors.hpp"
#include "mrdf/synthetic.hpp"
#include "mrdf/viz.hpp"

using namespace mrdf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("mrdf_viz_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

ModelConfig tiny_model(int d_in) {
    ModelConfig cfg;
    cfg.audio_encoder.arch = EncoderArch::SmallMlp;
    cfg.audio_encoder.out_dim = 10;
    cfg.audio_encoder.input_shape = {d_in};
    cfg.visual_encoder = cfg.audio_encoder;
    cfg.proj_dim = 6;
    cfg.fusion.model_dim = 12;
    cfg.fusion.n_blocks = 1;
    cfg.fusion.n_heads = 2;
    cfg.fusion.ff_dim = 16;
    cfg.fusion.max_len = 16;
    return cfg;
}

// Mean silhouette over points with two clusters; the oracle for "visually
// separated" on the 2-D output.
double silhouette(const Mat& pts, const std::vector<int>& cluster) {
    const Eigen::Index n = pts.rows();
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double intra = 0.0, inter = 0.0;
        long n_intra = 0, n_inter = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = (pts.row(i) - pts.row(j)).norm();
            if (cluster[static_cast<std::size_t>(i)] == cluster[static_cast<std::size_t>(j)]) {
                intra += d;
                ++n_intra;
            } else {
                inter += d;
                ++n_inter;
            }
        }
        const double a = intra / static_cast<double>(n_intra);
        const double b = inter / static_cast<double>(n_inter);
        total += (b - a) / std::max(a, b);
    }
    return total / static_cast<double>(n);
}

} // namespace

TEST_CASE("embedding dumps have one row per clip with the advertised width") {
    TempDir dir("dump");
    SynthSpec spec;
    spec.n_identities = 5;
    spec.clips_per_category = 10; // 40 clips
    spec.frames = 3;
    spec.latent_dim = 5;
    spec.seed = 2;
    Manifest m = generate_synthetic(spec, dir.path.string());
    auto clips = load_all_clips(m, 1);

    Model model(tiny_model(5), 1);
    EmbeddingDump audio = dump_embeddings(model, clips, EmbeddingStage::PreFusionAudio);
    CHECK(audio.vectors.rows() == 40);
    CHECK(audio.vectors.cols() == 6); // proj_dim
    CHECK(audio.sample_ids.size() == 40);

    EmbeddingDump fused = dump_embeddings(model, clips, EmbeddingStage::PostFusion);
    CHECK(fused.vectors.cols() == 12); // model_dim

    // determinism: same checkpoint, same dump
    EmbeddingDump again = dump_embeddings(model, clips, EmbeddingStage::PreFusionAudio);
    CHECK((again.vectors - audio.vectors).cwiseAbs().maxCoeff() == 0.0);

    // round-trip through disk
    const std::string path = (dir.path / "dump.tsv").string();
    save_embedding_dump(audio, path);
    EmbeddingDump loaded = load_embedding_dump(path);
    CHECK(loaded.stage == EmbeddingStage::PreFusionAudio);
    CHECK((loaded.vectors - audio.vectors).cwiseAbs().maxCoeff() == 0.0);
    CHECK(loaded.sample_ids == audio.sample_ids);

    CHECK_THROWS_AS(embedding_stage_from_name("bogus"), DataError);
}

TEST_CASE("t-sne separates two well-separated gaussians (silhouette > 0.5)") {
    Rng rng(7);
    const int n = 200;
    Mat pts(n, 10);
    std::vector<int> cluster(n);
    std::vector<Category> cats(n);
    for (int i = 0; i < n; ++i) {
        cluster[static_cast<std::size_t>(i)] = i % 2;
        cats[static_cast<std::size_t>(i)] = i % 2 ? Category::RARV : Category::FAFV;
        for (int d = 0; d < 10; ++d)
            pts(i, d) = rng.gaussian() + (i % 2 ? 8.0 : -8.0) * (d == 0 ? 1.0 : 0.0);
    }

    TsneConfig cfg;
    cfg.perplexity = 30.0;
    cfg.seed = 3;
    Mat coords = tsne_2d(pts, cfg);
    REQUIRE(coords.rows() == n);
    CHECK(silhouette(coords, cluster) > 0.5);

    // deterministic under seed
    Mat coords2 = tsne_2d(pts, cfg);
    CHECK((coords2 - coords).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("t-sne rejects too few points for the perplexity") {
    TsneConfig cfg;
    cfg.perplexity = 30.0;
    CHECK_THROWS_AS(tsne_2d(Mat::Zero(10, 4), cfg), DataError);
}

TEST_CASE("project_2d writes an image and a coordinates file with matching rows") {
    TempDir dir("proj");
    Rng rng(9);
    EmbeddingDump dump;
    dump.stage = EmbeddingStage::PreFusionVisual;
    const int n = 70;
    dump.vectors = Mat(n, 6);
    for (int i = 0; i < n; ++i) {
        for (int d = 0; d < 6; ++d)
            dump.vectors(i, d) = rng.gaussian() + (i % 2 ? 6.0 : -6.0);
        dump.sample_ids.push_back("c" + std::to_string(i));
        dump.categories.push_back(kAllCategories[static_cast<std::size_t>(i % 4)]);
    }

    ProjectionResult res = project_2d(dump, 15.0, 4, (dir.path / "vis").string());
    CHECK(fs::exists(res.image_path));
    CHECK(fs::exists(res.coords_path));
    CHECK(res.coords.rows() == n);

    // coordinate file has one row per dump row, categories preserved
    std::ifstream is(res.coords_path);
    std::string line;
    std::getline(is, line); // header
    int rows = 0;
    int rarv = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        ++rows;
        if (line.find("RARV") != std::string::npos) ++rarv;
    }
    CHECK(rows == n);
    CHECK(rarv > 0);

    // svg mentions every category in the legend
    std::ifstream svg(res.image_path);
    std::string content((std::istreambuf_iterator<char>(svg)),
                        std::istreambuf_iterator<char>());
    for (Category c : kAllCategories)
        CHECK(content.find(category_name(c)) != std::string::npos);
}
