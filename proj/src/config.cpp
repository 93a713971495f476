#include "authfp/config.hpp"

#include <filesystem>
#include <fstream>

#include "authfp/errors.hpp"

namespace authfp {

using nlohmann::json;

namespace {

void expect_keys(const json& obj, const std::string& section,
                 std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
        throw ConfigError("config: '" + section + "' must be an object");
    }
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* k : allowed) known = known || (key == k);
        if (!known) {
            throw ConfigError("config: unknown key '" + key + "' in '" + section + "'");
        }
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

std::vector<VariantOp> parse_variants(const json& arr, const std::string& section) {
    if (!arr.is_array()) throw ConfigError("config: '" + section + "' must be an array");
    std::vector<VariantOp> ops;
    for (const auto& v : arr) {
        expect_keys(v, section + "[]", {"op", "sigma", "bits", "ratio", "resolution"});
        const std::string op = get_or<std::string>(v, "op", "");
        try {
            if (op == "perturb") {
                ops.push_back(VariantOp::perturb(get_or<double>(v, "sigma", -1.0)));
            } else if (op == "quantize") {
                ops.push_back(VariantOp::quantize(get_or<int>(v, "bits", 0)));
            } else if (op == "prune") {
                ops.push_back(VariantOp::prune(get_or<double>(v, "ratio", -1.0)));
            } else if (op == "downsample") {
                ops.push_back(VariantOp::downsample(get_or<int>(v, "resolution", 0)));
            } else {
                throw ConfigError("config: unknown variant op '" + op + "' in '" + section + "'");
            }
        } catch (const InvalidArgumentError& e) {
            throw ConfigError("config: " + std::string(e.what()));
        }
    }
    return ops;
}

GeneratorSpec parse_generator(const json& g) {
    expect_keys(g, "generator",
                {"seed", "latent_dim", "channels", "height", "width", "hidden_width",
                 "kernel_size", "variants"});
    GeneratorSpec spec;
    spec.seed = get_or<uint64_t>(g, "seed", 7);
    spec.latent_dim = get_or<int>(g, "latent_dim", 64);
    spec.shape.channels = get_or<int>(g, "channels", 1);
    spec.shape.height = get_or<int>(g, "height", 32);
    spec.shape.width = get_or<int>(g, "width", 32);
    spec.hidden_width = get_or<int>(g, "hidden_width", 256);
    spec.kernel_size = get_or<int>(g, "kernel_size", 3);
    if (g.contains("variants")) spec.variants = parse_variants(g.at("variants"), "generator.variants");
    try {
        spec.validate();
    } catch (const InvalidArgumentError& e) {
        throw ConfigError("config: " + std::string(e.what()));
    }
    return spec;
}

TrainConfig parse_train(const json& t) {
    expect_keys(t, "train",
                {"fingerprint_length", "batch_size", "learning_rate", "train_steps",
                 "calibration_samples", "target_tpr", "sampling", "hidden_widths"});
    TrainConfig config;
    config.fingerprint_length = get_or<int>(t, "fingerprint_length", config.fingerprint_length);
    config.batch_size = get_or<int>(t, "batch_size", config.batch_size);
    config.learning_rate = get_or<double>(t, "learning_rate", config.learning_rate);
    config.train_steps = get_or<int>(t, "train_steps", config.train_steps);
    config.calibration_samples = get_or<int>(t, "calibration_samples", config.calibration_samples);
    config.target_tpr = get_or<double>(t, "target_tpr", config.target_tpr);
    const std::string sampling = get_or<std::string>(t, "sampling", "with-replacement");
    if (sampling == "with-replacement") {
        config.sampling = IndexSampling::WithReplacement;
    } else if (sampling == "without-replacement") {
        config.sampling = IndexSampling::WithoutReplacement;
    } else {
        throw ConfigError("config: train.sampling must be with-replacement or without-replacement");
    }
    config.reconstructor_hidden =
        get_or<std::vector<int>>(t, "hidden_widths", config.reconstructor_hidden);
    try {
        config.validate();
    } catch (const InvalidArgumentError& e) {
        throw ConfigError("config: " + std::string(e.what()));
    }
    return config;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    expect_keys(j, "<root>",
                {"master_seed", "output_dir", "generator", "negatives", "train",
                 "detector_artifact", "fingerprint_lengths", "ensemble_sizes", "eval_samples",
                 "attack", "recovery"});
    ExperimentConfig config;
    config.raw = j;
    config.master_seed = get_or<uint64_t>(j, "master_seed", 0);
    config.output_dir = get_or<std::string>(j, "output_dir", "out");
    if (j.contains("generator")) config.generator = parse_generator(j.at("generator"));
    if (j.contains("train")) config.train = parse_train(j.at("train"));
    if (j.contains("detector_artifact")) {
        config.detector_artifact = get_or<std::string>(j, "detector_artifact", "");
    }

    if (j.contains("negatives")) {
        const json& negs = j.at("negatives");
        if (!negs.is_array()) throw ConfigError("config: 'negatives' must be an array");
        for (const auto& n : negs) {
            expect_keys(n, "negatives[]", {"id", "variants"});
            ExperimentConfig::Negative neg;
            neg.variants = parse_variants(n.contains("variants") ? n.at("variants") : json::array(),
                                          "negatives[].variants");
            neg.id = get_or<std::string>(n, "id", "");
            if (neg.id.empty()) {
                GeneratorSpec tmp = config.generator;
                for (const VariantOp& op : neg.variants) tmp = apply_variant(tmp, op);
                neg.id = tmp.variants.empty() ? "null" : tmp.label();
            }
            config.negatives.push_back(std::move(neg));
        }
    }

    config.fingerprint_lengths =
        get_or<std::vector<int>>(j, "fingerprint_lengths", config.fingerprint_lengths);
    for (int l : config.fingerprint_lengths) {
        if (l < 1) throw ConfigError("config: fingerprint_lengths entries must be >= 1");
    }
    config.ensemble_sizes = get_or<std::vector<int>>(j, "ensemble_sizes", config.ensemble_sizes);
    for (int n : config.ensemble_sizes) {
        if (n < 1) throw ConfigError("config: ensemble_sizes entries must be >= 1");
    }
    config.eval_samples = get_or<int>(j, "eval_samples", config.eval_samples);
    if (config.eval_samples < 100) throw ConfigError("config: eval_samples must be >= 100");

    if (j.contains("attack")) {
        const json& a = j.at("attack");
        expect_keys(a, "attack",
                    {"epsilon", "step_size", "momentum", "max_steps", "num_images",
                     "surrogate_guessed_length", "surrogate_train_steps",
                     "discriminator_train_steps", "discriminator_batch_size",
                     "discriminator_hidden"});
        config.attack.pgd.epsilon = get_or<double>(a, "epsilon", config.attack.pgd.epsilon);
        config.attack.pgd.step_size = get_or<double>(a, "step_size", config.attack.pgd.step_size);
        config.attack.pgd.momentum = get_or<double>(a, "momentum", config.attack.pgd.momentum);
        config.attack.pgd.max_steps = get_or<int>(a, "max_steps", config.attack.pgd.max_steps);
        config.attack.num_images = get_or<int>(a, "num_images", config.attack.num_images);
        config.attack.surrogate_guessed_length =
            get_or<int>(a, "surrogate_guessed_length", config.attack.surrogate_guessed_length);
        config.attack.surrogate_train_steps =
            get_or<int>(a, "surrogate_train_steps", config.attack.surrogate_train_steps);
        config.attack.discriminator.train_steps =
            get_or<int>(a, "discriminator_train_steps", config.attack.discriminator.train_steps);
        config.attack.discriminator.batch_size =
            get_or<int>(a, "discriminator_batch_size", config.attack.discriminator.batch_size);
        config.attack.discriminator.hidden =
            get_or<std::vector<int>>(a, "discriminator_hidden", config.attack.discriminator.hidden);
        try {
            config.attack.pgd.validate();
        } catch (const InvalidArgumentError& e) {
            throw ConfigError("config: " + std::string(e.what()));
        }
        if (config.attack.num_images < 1) {
            throw ConfigError("config: attack.num_images must be >= 1");
        }
    }

    if (j.contains("recovery")) {
        const json& r = j.at("recovery");
        expect_keys(r, "recovery",
                    {"tau_values", "l_values", "delta", "natgt_dim", "stability_m_values",
                     "stability_trials", "delta_sq_samples"});
        config.recovery.tau_values =
            get_or<std::vector<double>>(r, "tau_values", config.recovery.tau_values);
        config.recovery.l_values = get_or<std::vector<int>>(r, "l_values", config.recovery.l_values);
        config.recovery.delta = get_or<double>(r, "delta", config.recovery.delta);
        config.recovery.natgt_dim = get_or<int>(r, "natgt_dim", config.recovery.natgt_dim);
        config.recovery.stability_m_values =
            get_or<std::vector<int>>(r, "stability_m_values", config.recovery.stability_m_values);
        config.recovery.stability_trials =
            get_or<int>(r, "stability_trials", config.recovery.stability_trials);
        config.recovery.delta_sq_samples =
            get_or<int>(r, "delta_sq_samples", config.recovery.delta_sq_samples);
        if (!(config.recovery.delta > 0.0)) throw ConfigError("config: recovery.delta must be > 0");
    }

    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config: JSON parse failure in '" + path + "': " + e.what());
    }
    return parse_config(j);
}

std::string ExperimentConfig::digest() const {
    // FNV-1a 64 over the canonical (sorted-key) JSON encoding.
    const std::string canon = raw.dump();
    uint64_t h = 0xCBF29CE484222325ull;
    for (char c : canon) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunManifest::RunManifest(const ExperimentConfig& config, std::string command) {
    doc_["code_version"] = kCodeVersion;
    doc_["command"] = std::move(command);
    doc_["config_digest"] = config.digest();
    doc_["master_seed"] = config.master_seed;
    doc_["stages"] = nlohmann::json::array();
    doc_["artifacts"] = nlohmann::json::array();
}

void RunManifest::add_stage(const std::string& name, double seconds, uint64_t seed) {
    doc_["stages"].push_back({{"name", name}, {"seconds", seconds}, {"seed", seed}});
}

void RunManifest::add_artifact(const std::string& relative_path) {
    artifacts_.push_back(relative_path);
    doc_["artifacts"].push_back(relative_path);
}

void RunManifest::set_field(const std::string& key, const nlohmann::json& value) {
    doc_[key] = value;
}

std::string RunManifest::write(const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/manifest.json";
    std::ofstream out(path);
    if (!out) throw PersistenceError("cannot write manifest '" + path + "'");
    out << doc_.dump(2) << "\n";
    return path;
}

}  // namespace authfp
