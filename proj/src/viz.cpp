#include "mrdf/viz.hpp"

#include <fstream>
#include <sstream>

#include "mrdf/errors.hpp"

namespace mrdf {

const char* embedding_stage_name(EmbeddingStage s) {
    switch (s) {
    case EmbeddingStage::PreFusionAudio: return "pre_fusion_audio";
    case EmbeddingStage::PreFusionVisual: return "pre_fusion_visual";
    case EmbeddingStage::PostFusion: return "post_fusion";
    }
    return "?";
}

EmbeddingStage embedding_stage_from_name(const std::string& name) {
    if (name == "pre_fusion_audio") return EmbeddingStage::PreFusionAudio;
    if (name == "pre_fusion_visual") return EmbeddingStage::PreFusionVisual;
    if (name == "post_fusion") return EmbeddingStage::PostFusion;
    throw DataError("unknown embedding stage '" + name + "'");
}

EmbeddingDump dump_embeddings(Model& model, const std::vector<LoadedClip>& clips,
                              EmbeddingStage stage) {
    if (clips.empty()) throw DataError("dump_embeddings: empty manifest");
    EmbeddingDump dump;
    dump.stage = stage;
    for (std::size_t i = 0; i < clips.size(); ++i) {
        ad::Tape tape;
        Binding b = model.bind(tape, /*training=*/false, /*with_grad=*/false);
        ClipOutputs out = model.forward_clip(b, clips[i].features);
        const Mat& row = stage == EmbeddingStage::PreFusionAudio    ? out.emb_audio.value()
                         : stage == EmbeddingStage::PreFusionVisual ? out.emb_visual.value()
                                                                    : out.pooled_fused.value();
        if (dump.vectors.size() == 0) dump.vectors.resize(clips.size(), row.cols());
        dump.vectors.row(static_cast<Eigen::Index>(i)) = row.row(0);
        dump.sample_ids.push_back(clips[i].sample.id);
        dump.categories.push_back(clips[i].sample.category);
    }
    return dump;
}

void save_embedding_dump(const EmbeddingDump& dump, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("cannot open embedding dump for writing: " + path);
    os << "sample_id\tcategory\tstage";
    for (Eigen::Index d = 0; d < dump.vectors.cols(); ++d) os << "\tf" << d;
    os << "\n";
    os.precision(17);
    for (Eigen::Index i = 0; i < dump.vectors.rows(); ++i) {
        os << dump.sample_ids[static_cast<std::size_t>(i)] << '\t'
           << category_name(dump.categories[static_cast<std::size_t>(i)]) << '\t'
           << embedding_stage_name(dump.stage);
        for (Eigen::Index d = 0; d < dump.vectors.cols(); ++d) os << '\t' << dump.vectors(i, d);
        os << "\n";
    }
    if (!os) throw DataError("failed writing embedding dump: " + path);
}

EmbeddingDump load_embedding_dump(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open embedding dump: " + path);
    std::string line;
    if (!std::getline(is, line) || line.rfind("sample_id\tcategory\tstage", 0) != 0)
        throw DataError("bad embedding dump header in " + path);

    EmbeddingDump dump;
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string id, cat, stage, tok;
        std::getline(ls, id, '\t');
        std::getline(ls, cat, '\t');
        std::getline(ls, stage, '\t');
        dump.sample_ids.push_back(id);
        dump.categories.push_back(category_from_name(cat));
        dump.stage = embedding_stage_from_name(stage);
        std::vector<double> vals;
        while (std::getline(ls, tok, '\t')) vals.push_back(std::stod(tok));
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw DataError("empty embedding dump: " + path);
    dump.vectors.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw DataError("ragged embedding dump row in " + path);
        for (std::size_t d = 0; d < rows[i].size(); ++d)
            dump.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[i][d];
    }
    return dump;
}

namespace {

const char* category_color(Category c) {
    switch (c) {
    case Category::FAFV: return "#d62728"; // red
    case Category::FARV: return "#ff7f0e"; // orange
    case Category::RAFV: return "#9467bd"; // purple
    case Category::RARV: return "#2ca02c"; // green
    }
    return "#000000";
}

void write_scatter_svg(const Mat& coords, const std::vector<Category>& cats,
                       const std::string& title, const std::string& path) {
    const double width = 640, height = 640, margin = 48;
    double xmin = coords.col(0).minCoeff(), xmax = coords.col(0).maxCoeff();
    double ymin = coords.col(1).minCoeff(), ymax = coords.col(1).maxCoeff();
    if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
    auto sx = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin); };
    auto sy = [&](double y) {
        return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin);
    };

    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("cannot open svg for writing: " + path);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
        os << "<circle cx=\"" << sx(coords(i, 0)) << "\" cy=\"" << sy(coords(i, 1))
           << "\" r=\"3\" fill=\"" << category_color(cats[static_cast<std::size_t>(i)])
           << "\" fill-opacity=\"0.75\"/>\n";
    }
    double ly = 40;
    for (Category c : kAllCategories) {
        os << "<circle cx=\"" << width - 110 << "\" cy=\"" << ly << "\" r=\"4\" fill=\""
           << category_color(c) << "\"/>\n";
        os << "<text x=\"" << width - 98 << "\" y=\"" << ly + 4
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << category_name(c)
           << "</text>\n";
        ly += 18;
    }
    os << "</svg>\n";
    if (!os) throw DataError("failed writing svg: " + path);
}

} // namespace

ProjectionResult project_2d(const EmbeddingDump& dump, double perplexity, std::uint64_t seed,
                            const std::string& out_prefix) {
    TsneConfig cfg;
    cfg.perplexity = perplexity;
    cfg.seed = seed;
    ProjectionResult res;
    res.coords = tsne_2d(dump.vectors, cfg);
    res.image_path = out_prefix + ".svg";
    res.coords_path = out_prefix + ".tsv";

    write_scatter_svg(res.coords, dump.categories,
                      std::string(embedding_stage_name(dump.stage)) + " (t-SNE)",
                      res.image_path);

    std::ofstream os(res.coords_path, std::ios::trunc);
    if (!os) throw DataError("cannot open coordinates file for writing: " + res.coords_path);
    os << "sample_id\tcategory\tx\ty\n";
    os.precision(17);
    for (Eigen::Index i = 0; i < res.coords.rows(); ++i)
        os << dump.sample_ids[static_cast<std::size_t>(i)] << '\t'
           << category_name(dump.categories[static_cast<std::size_t>(i)]) << '\t'
           << res.coords(i, 0) << '\t' << res.coords(i, 1) << "\n";
    if (!os) throw DataError("failed writing coordinates: " + res.coords_path);
    return res;
}

} // namespace mrdf
