#include "mrdf/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mrdf/errors.hpp"

namespace fs = std::filesystem;

namespace mrdf {

Config::Config() {
    // Training recipe defaults: ResNet-18-style encoders into a 12-block
    // transformer, Adam at 1e-3, batch 64, 30 epochs, equal loss weights,
    // zero margins.
    model.audio_encoder.arch = EncoderArch::Resnet18Style;
    model.audio_encoder.out_dim = 512;
    model.visual_encoder.arch = EncoderArch::Resnet18Style;
    model.visual_encoder.out_dim = 512;
    model.proj_dim = 256;
    model.fusion.model_dim = 768;
    model.fusion.n_blocks = 12;
    model.fusion.n_heads = 12;
    model.fusion.ff_dim = 3072;
}

namespace {

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw UsageError("config: bad integer for " + key + ": '" + v + "'");
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw UsageError("config: bad number for " + key + ": '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw UsageError("config: bad boolean for " + key + ": '" + v + "'");
}

std::vector<int> to_shape(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::istringstream is(v);
    std::string tok;
    while (std::getline(is, tok, 'x'))
        if (!tok.empty()) out.push_back(to_int(key, tok));
    return out;
}

std::string shape_str(const std::vector<int>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "x" : "") << v[i];
    return os.str();
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

void apply_encoder_key(EncoderConfig& e, const std::string& key, const std::string& sub,
                       const std::string& v) {
    if (sub == "arch") {
        try {
            e.arch = encoder_arch_from_name(v);
        } catch (const DataError& err) {
            throw UsageError(std::string("config: ") + err.what());
        }
    } else if (sub == "out_dim")
        e.out_dim = to_int(key, v);
    else if (sub == "input")
        e.input_shape = to_shape(key, v);
    else if (sub == "hidden")
        e.hidden_dims = to_shape(key, v);
    else if (sub == "base_channels")
        e.base_channels = to_int(key, v);
    else
        throw UsageError("config: unknown key " + key);
}

} // namespace

void Config::apply(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    try {
        if (key == "frontend.ratio")
            frontend.ratio = to_int(key, v);
        else if (key == "frontend.n_mels")
            frontend.n_mels = to_int(key, v);
        else if (key == "frontend.hop_ms")
            frontend.hop_ms = to_double(key, v);
        else if (key == "frontend.win_ms")
            frontend.win_ms = to_double(key, v);
        else if (key.rfind("encoders.audio.", 0) == 0)
            apply_encoder_key(model.audio_encoder, key, key.substr(15), v);
        else if (key.rfind("encoders.visual.", 0) == 0)
            apply_encoder_key(model.visual_encoder, key, key.substr(16), v);
        else if (key == "encoders.visual_input") // crop spec for image frontends
            model.visual_encoder.input_shape = to_shape(key, v);
        else if (key == "model.proj_dim")
            model.proj_dim = to_int(key, v);
        else if (key == "fusion.model_dim")
            model.fusion.model_dim = to_int(key, v);
        else if (key == "fusion.n_blocks")
            model.fusion.n_blocks = to_int(key, v);
        else if (key == "fusion.n_heads")
            model.fusion.n_heads = to_int(key, v);
        else if (key == "fusion.ff_dim")
            model.fusion.ff_dim = to_int(key, v);
        else if (key == "fusion.dropout")
            model.fusion.dropout = to_double(key, v);
        else if (key == "fusion.max_len")
            model.fusion.max_len = to_int(key, v);
        else if (key == "loss.variant")
            train.variant = loss::variant_from_name(v);
        else if (key == "loss.weights.ce")
            train.weights.ce = to_double(key, v);
        else if (key == "loss.weights.cmr")
            train.weights.cmr = to_double(key, v);
        else if (key == "loss.weights.wmr")
            train.weights.wmr = to_double(key, v);
        else if (key == "loss.margin.alpha_a")
            train.margins.alpha_audio = to_double(key, v);
        else if (key == "loss.margin.alpha_v")
            train.margins.alpha_visual = to_double(key, v);
        else if (key == "loss.reduction")
            train.reduction = loss::reduction_from_name(v);
        else if (key == "loss.wmr_ce_target")
            train.wmr_target = loss::wmr_target_from_name(v);
        else if (key == "loss.pairing_policy")
            train.pairing_policy = pairing_policy_from_name(v);
        else if (key == "train.epochs")
            train.epochs = to_int(key, v);
        else if (key == "train.batch_size")
            train.batch_size = to_int(key, v);
        else if (key == "train.lr")
            train.lr = to_double(key, v);
        else if (key == "train.seed")
            train.seed = static_cast<std::uint64_t>(std::stoull(v));
        else if (key == "train.optimizer") {
            if (v != "adam") throw UsageError("config: only 'adam' optimizer is available");
        } else if (key == "train.val_fraction")
            train.val_fraction = to_double(key, v);
        else if (key == "train.stratified_batches")
            train.stratified_batches = to_bool(key, v);
        else if (key == "train.cosine_lr_decay")
            train.cosine_lr_decay = to_bool(key, v);
        else if (key == "train.keep_epoch_checkpoints")
            train.keep_epoch_checkpoints = to_bool(key, v);
        else if (key == "train.adam.beta1")
            train.adam.beta1 = to_double(key, v);
        else if (key == "train.adam.beta2")
            train.adam.beta2 = to_double(key, v);
        else if (key == "train.adam.eps")
            train.adam.eps = to_double(key, v);
        else if (key == "viz.perplexity")
            viz_perplexity = to_double(key, v);
        else
            throw UsageError("config: unknown key " + key);
    } catch (const DataError& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
}

void Config::echo(std::ostream& os) const {
    os << "# effective configuration\n";
    os << "frontend.ratio = " << frontend.ratio << "\n";
    os << "frontend.n_mels = " << frontend.n_mels << "\n";
    os << "frontend.hop_ms = " << frontend.hop_ms << "\n";
    os << "frontend.win_ms = " << frontend.win_ms << "\n";
    auto enc = [&](const char* name, const EncoderConfig& e) {
        os << "encoders." << name << ".arch = " << encoder_arch_name(e.arch) << "\n";
        os << "encoders." << name << ".out_dim = " << e.out_dim << "\n";
        os << "encoders." << name << ".input = " << shape_str(e.input_shape) << "\n";
        os << "encoders." << name << ".hidden = " << shape_str(e.hidden_dims) << "\n";
        os << "encoders." << name << ".base_channels = " << e.base_channels << "\n";
    };
    enc("audio", model.audio_encoder);
    enc("visual", model.visual_encoder);
    os << "model.proj_dim = " << model.proj_dim << "\n";
    os << "fusion.model_dim = " << model.fusion.model_dim << "\n";
    os << "fusion.n_blocks = " << model.fusion.n_blocks << "\n";
    os << "fusion.n_heads = " << model.fusion.n_heads << "\n";
    os << "fusion.ff_dim = " << model.fusion.ff_dim << "\n";
    os << "fusion.dropout = " << model.fusion.dropout << "\n";
    os << "fusion.max_len = " << model.fusion.max_len << "\n";
    os << "loss.variant = " << loss::variant_name(train.variant) << "\n";
    os << "loss.weights.ce = " << train.weights.ce << "\n";
    os << "loss.weights.cmr = " << train.weights.cmr << "\n";
    os << "loss.weights.wmr = " << train.weights.wmr << "\n";
    os << "loss.margin.alpha_a = " << train.margins.alpha_audio << "\n";
    os << "loss.margin.alpha_v = " << train.margins.alpha_visual << "\n";
    os << "loss.reduction = " << loss::reduction_name(train.reduction) << "\n";
    os << "loss.wmr_ce_target = " << loss::wmr_target_name(train.wmr_target) << "\n";
    os << "loss.pairing_policy = " << pairing_policy_name(train.pairing_policy) << "\n";
    os << "train.epochs = " << train.epochs << "\n";
    os << "train.batch_size = " << train.batch_size << "\n";
    os << "train.lr = " << train.lr << "\n";
    os << "train.seed = " << train.seed << "\n";
    os << "train.optimizer = adam\n";
    os << "train.val_fraction = " << train.val_fraction << "\n";
    os << "train.stratified_batches = " << (train.stratified_batches ? "true" : "false") << "\n";
    os << "train.cosine_lr_decay = " << (train.cosine_lr_decay ? "true" : "false") << "\n";
    os << "train.keep_epoch_checkpoints = " << (train.keep_epoch_checkpoints ? "true" : "false")
       << "\n";
    os << "train.adam.beta1 = " << train.adam.beta1 << "\n";
    os << "train.adam.beta2 = " << train.adam.beta2 << "\n";
    os << "train.adam.eps = " << train.adam.eps << "\n";
    os << "viz.perplexity = " << viz_perplexity << "\n";
}

Config load_config_file(const std::string& path, Config base) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open config file: " + path);
    std::string line;
    std::size_t row = 0;
    while (std::getline(is, line)) {
        ++row;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError("config " + path + " line " + std::to_string(row) +
                            ": expected key = value");
        base.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

void apply_overrides(Config& cfg, const std::vector<std::string>& overrides) {
    for (const auto& ov : overrides) {
        const std::size_t eq = ov.find('=');
        if (eq == std::string::npos)
            throw UsageError("override '" + ov + "' must look like key=value");
        cfg.apply(trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
    }
}

Config resolve_config(const std::string& config_path, const std::vector<std::string>& overrides) {
    Config cfg;
    if (const char* env = std::getenv("MRDF_CONFIG"); env && *env)
        cfg = load_config_file(env, std::move(cfg));
    if (!config_path.empty()) cfg = load_config_file(config_path, std::move(cfg));
    apply_overrides(cfg, overrides);
    return cfg;
}

void write_config_echo(const Config& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::ofstream os(fs::path(out_dir) / "effective_config.cfg");
    if (!os) throw DataError("cannot write config echo into " + out_dir);
    cfg.echo(os);
}

} // namespace mrdf
