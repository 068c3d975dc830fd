// End-to-end exercises of the command-line binary (path injected by CMake).

#include <cstdio>
#include <unistd.h>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void expect(bool cond, const std::string& what) {
    if (cond) {
        std::cout << "[ok] " << what << "\n";
    } else {
        std::cout << "[FAILED] " << what << "\n";
        ++failures;
    }
}

int run(const std::string& args) {
    const std::string cmd = std::string(MRDF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

} // namespace

int main() {
    const fs::path root = fs::temp_directory_path() / ("mrdf_cli_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string data = (root / "data").string();

    expect(run("") == 1, "no subcommand exits with usage code 1");
    expect(run("frobnicate") == 1, "unknown verb exits with usage code 1");
    expect(run("synth --out " + data +
               " --seed 7 --identities 6 --clips 6 --frames 4 --latent-dim 6 --noise 0.2 "
               "--shift 1.5") == 0,
           "synth succeeds");
    expect(fs::exists(root / "data" / "manifest.tsv"), "synth writes a manifest");
    expect(fs::exists(root / "data" / "data_config.cfg"), "synth writes the frontend hint");

    // determinism: regenerate into a second directory, compare bytes
    const std::string data2 = (root / "data2").string();
    run("synth --out " + data2 +
        " --seed 7 --identities 6 --clips 6 --frames 4 --latent-dim 6 --noise 0.2 --shift 1.5");
    expect(slurp(root / "data" / "manifest.tsv") == slurp(root / "data2" / "manifest.tsv"),
           "synth manifests are bit-identical under one seed");
    expect(slurp(root / "data" / "features" / "clip_000000_a.bin") ==
               slurp(root / "data2" / "features" / "clip_000000_a.bin"),
           "synth feature files are bit-identical under one seed");

    expect(run("manifest --data " + data) == 0, "manifest summary succeeds");
    expect(run("manifest --data " + (root / "nowhere").string()) == 2,
           "missing manifest is a data error (exit 2)");

    const std::string folds = (root / "folds.tsv").string();
    expect(run("split --data " + data + " --k 3 --seed 1 --out " + folds) == 0, "split succeeds");
    expect(fs::exists(folds), "split writes the fold plan");
    expect(run("split --data " + data + " --k 99 --seed 1 --out " + folds) == 2,
           "too many folds is a data error (exit 2)");

    const std::string run_dir = (root / "run").string();
    const std::string tiny =
        " --set encoders.audio.arch=small_mlp --set encoders.visual.arch=small_mlp"
        " --set encoders.audio.out_dim=12 --set encoders.visual.out_dim=12"
        " --set encoders.audio.hidden=8 --set encoders.visual.hidden=8"
        " --set model.proj_dim=6 --set fusion.model_dim=12 --set fusion.n_blocks=1"
        " --set fusion.n_heads=2 --set fusion.ff_dim=16"
        " --set train.epochs=2 --set train.batch_size=8";
    expect(run("train --data " + data + " --out " + run_dir + " --variant ce --seed 3" + tiny) ==
               0,
           "train succeeds");
    expect(fs::exists(run_dir + "/last.ckpt"), "train writes a checkpoint");
    expect(fs::exists(run_dir + "/effective_config.cfg"), "train echoes the effective config");

    const std::string eval_dir = (root / "eval").string();
    expect(run("eval --data " + data + " --checkpoint " + run_dir + "/last.ckpt --out " +
               eval_dir) == 0,
           "eval succeeds");
    expect(fs::exists(eval_dir + "/report.txt"), "eval writes a report");
    expect(fs::exists(eval_dir + "/predictions.tsv"), "eval writes predictions");

    const std::string viz_dir = (root / "viz").string();
    expect(run("visualize --data " + data + " --checkpoint " + run_dir +
               "/last.ckpt --stage pre_fusion_audio --seed 5 --set viz.perplexity=5 --out " +
               viz_dir) == 0,
           "visualize succeeds");
    expect(fs::exists(viz_dir + "/pre_fusion_audio.svg"), "visualize writes the image");
    expect(fs::exists(viz_dir + "/pre_fusion_audio.tsv"), "visualize writes coordinates");
    expect(run("visualize --data " + data + " --checkpoint " + run_dir +
               "/last.ckpt --stage bogus --out " + viz_dir) == 2,
           "unknown stage is a data error (exit 2)");

    const std::string cv_dir = (root / "cv").string();
    expect(run("crossval --data " + data + " --k 2 --variant baseline --seed 3 --out " + cv_dir +
               tiny) == 0,
           "crossval succeeds");
    expect(fs::exists(cv_dir + "/crossval_report.tsv"), "crossval writes the table");
    expect(fs::exists(cv_dir + "/fold_plan.tsv"), "crossval writes the fold plan");

    expect(run("train --data " + data + " --out " + run_dir + " --set bogus.key=1") == 1,
           "unknown config key is a usage error (exit 1)");

    std::error_code ec;
    fs::remove_all(root, ec);
    if (failures) {
        std::cout << failures << " cli checks failed\n";
        return 1;
    }
    std::cout << "all cli checks passed\n";
    return 0;
}
