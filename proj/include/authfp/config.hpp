#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "authfp/attacks.hpp"
#include "authfp/detector.hpp"
#include "authfp/generators.hpp"

namespace authfp {

/// Canonical experiment description. Parsed from JSON with unknown keys
/// rejected; every field is validated before any compute starts.
struct ExperimentConfig {
    uint64_t master_seed = 0;
    std::string output_dir = "out";

    GeneratorSpec generator;

    struct Negative {
        std::string id;
        std::vector<VariantOp> variants;
    };
    std::vector<Negative> negatives;

    TrainConfig train;
    std::optional<std::string> detector_artifact;  // reuse instead of training

    std::vector<int> fingerprint_lengths;  // evaluate sweep; empty -> train value
    std::vector<int> ensemble_sizes = {1, 2, 4};
    int eval_samples = 2000;

    struct Attack {
        PgdConfig pgd;
        int num_images = 50;
        int surrogate_guessed_length = 0;  // 0 -> train.fingerprint_length
        int surrogate_train_steps = 0;     // 0 -> train.train_steps (equal budgets)
        DiscriminatorConfig discriminator;
    };
    Attack attack;

    struct Recovery {
        std::vector<double> tau_values = {0.01};
        std::vector<int> l_values = {32, 64, 128, 256, 512};
        double delta = 0.5;
        int natgt_dim = 3 * 256 * 256;
        std::vector<int> stability_m_values = {1, 2, 4, 8, 16, 32, 64, 128, 256};
        int stability_trials = 500;
        int delta_sq_samples = 2000;
    };
    Recovery recovery;

    nlohmann::json raw;

    /// 16-hex-digit digest of the canonical JSON form.
    std::string digest() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Per-run provenance: config digest, code version, seeds, wall-clock per
/// stage, and every emitted file. Timing fields are the only
/// non-reproducible content.
class RunManifest {
public:
    RunManifest(const ExperimentConfig& config, std::string command);

    void add_stage(const std::string& name, double seconds, uint64_t seed);
    void add_artifact(const std::string& relative_path);
    void set_field(const std::string& key, const nlohmann::json& value);

    /// Writes <out_dir>/manifest.json and returns its path.
    std::string write(const std::string& out_dir);

    const std::vector<std::string>& artifacts() const { return artifacts_; }

private:
    nlohmann::json doc_;
    std::vector<std::string> artifacts_;
};

inline constexpr const char* kCodeVersion = "authfp 0.1.0";

}  // namespace authfp
