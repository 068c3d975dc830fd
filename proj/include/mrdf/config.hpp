#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mrdf/frontend.hpp"
#include "mrdf/model.hpp"
#include "mrdf/trainer.hpp"

namespace mrdf {

// Flat key-value configuration covering the whole pipeline. File format: one
// `key = value` per line, `#` comments. CLI `--set key=value` overrides take
// precedence over the file; the effective config is echoed into every output
// directory. MRDF_CONFIG names a default config file.
struct Config {
    FrontendConfig frontend;
    ModelConfig model;
    TrainConfig train;
    double viz_perplexity = 30.0;

    Config(); // training-recipe defaults

    void apply(const std::string& key, const std::string& value); // throws UsageError
    void echo(std::ostream& os) const;
};

Config load_config_file(const std::string& path, Config base = Config());

// Applies `key=value` strings (from --set flags) in order.
void apply_overrides(Config& cfg, const std::vector<std::string>& overrides);

// Resolution order: built-in defaults -> $MRDF_CONFIG -> --config file ->
// --set overrides.
Config resolve_config(const std::string& config_path, const std::vector<std::string>& overrides);

void write_config_echo(const Config& cfg, const std::string& out_dir);

} // namespace mrdf
