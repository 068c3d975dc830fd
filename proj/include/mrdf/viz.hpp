#pragma once

#include <string>
#include <vector>

#include "mrdf/clips.hpp"
#include "mrdf/model.hpp"
#include "mrdf/tsne.hpp"

namespace mrdf {

enum class EmbeddingStage { PreFusionAudio, PreFusionVisual, PostFusion };

const char* embedding_stage_name(EmbeddingStage s);
EmbeddingStage embedding_stage_from_name(const std::string& name); // throws DataError

// One row per clip at the requested stage: projected unimodal clip embeddings
// before fusion, or the pooled transformer output after it.
struct EmbeddingDump {
    EmbeddingStage stage = EmbeddingStage::PostFusion;
    Mat vectors; // [N x D]
    std::vector<std::string> sample_ids;
    std::vector<Category> categories;
};

EmbeddingDump dump_embeddings(Model& model, const std::vector<LoadedClip>& clips,
                              EmbeddingStage stage);

// TSV with header: sample_id, category, stage, then D feature columns.
void save_embedding_dump(const EmbeddingDump& dump, const std::string& path);
EmbeddingDump load_embedding_dump(const std::string& path);

// 2-D projection of a dump: writes an SVG scatter colored by category and a
// TSV of coordinates. Returns the coordinates.
struct ProjectionResult {
    Mat coords; // [N x 2]
    std::string image_path;
    std::string coords_path;
};
ProjectionResult project_2d(const EmbeddingDump& dump, double perplexity, std::uint64_t seed,
                            const std::string& out_prefix);

} // namespace mrdf
