#include "authfp/commands.hpp"

#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "authfp/artifact.hpp"
#include "authfp/errors.hpp"

namespace authfp {
namespace {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::ofstream open_report(const std::string& path, const char* schema) {
    std::ofstream out(path);
    if (!out) throw PersistenceError("cannot open report '" + path + "'");
    out << "# schema: " << schema << "\n";
    out.precision(10);
    return out;
}

GeneratorSpec negative_spec(const ExperimentConfig& config,
                            const ExperimentConfig::Negative& negative) {
    GeneratorSpec spec = config.generator;
    for (const VariantOp& op : negative.variants) spec = apply_variant(spec, op);
    return spec;
}

/// Train with a derived seed, or load the configured artifact when its
/// fingerprint length matches.
Detector obtain_detector(const ExperimentConfig& config, int fingerprint_length, uint64_t seed,
                         RunManifest& manifest, const std::string& stage) {
    if (config.detector_artifact) {
        Detector det = load_detector(*config.detector_artifact);
        if (det.fingerprint_length() == fingerprint_length &&
            det.dim() == config.generator.dim()) {
            manifest.add_stage(stage + "/load", 0.0, 0);
            return det;
        }
    }
    Stopwatch watch;
    TrainConfig train = config.train;
    train.fingerprint_length = fingerprint_length;
    train.seed = seed;
    Rng rng(seed);
    Detector det = certify(config.generator, train, rng);
    det.meta.config_digest = std::stoull(config.digest(), nullptr, 16);
    manifest.add_stage(stage + "/train", watch.seconds(), seed);
    std::printf("[%s] trained detector l=%d in %.1fs (final loss %.3g, tau %.3g)\n", stage.c_str(),
                fingerprint_length, watch.seconds(), det.meta.final_train_loss, det.tau);
    return det;
}

}  // namespace

void cmd_certify(const ExperimentConfig& config, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    RunManifest manifest(config, "certify");

    const uint64_t seed = derive_seed(config.master_seed, "certify/train");
    Stopwatch watch;
    TrainConfig train = config.train;
    train.seed = seed;
    Rng rng(seed);
    Detector detector = certify(config.generator, train, rng);
    detector.meta.config_digest = std::stoull(config.digest(), nullptr, 16);
    manifest.add_stage("train", watch.seconds(), seed);
    manifest.set_field("final_train_loss", detector.meta.final_train_loss);

    save_detector(detector, out_dir + "/detector.afpd");
    manifest.add_artifact("detector.afpd");
    manifest.write(out_dir);
    std::printf("[certify] wrote %s/detector.afpd (final loss %.3g)\n", out_dir.c_str(),
                detector.meta.final_train_loss);
}

void cmd_evaluate(const ExperimentConfig& config, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    RunManifest manifest(config, "evaluate");
    if (config.negatives.empty()) {
        throw ConfigError("evaluate: config must list at least one negative model");
    }

    std::vector<int> lengths = config.fingerprint_lengths;
    if (lengths.empty()) lengths = {config.train.fingerprint_length};

    std::ofstream grid = open_report(out_dir + "/eval_grid.csv", "authfp.eval-grid.v1");
    grid << "fingerprint_length,negative_id,n_per_side,fpr_at_target,auc,tau,tpr\n";

    for (int l : lengths) {
        const uint64_t train_seed =
            derive_seed(config.master_seed, "evaluate/train", static_cast<uint64_t>(l));
        Detector detector = obtain_detector(config, l, train_seed, manifest,
                                            "evaluate/l" + std::to_string(l));
        SyntheticGenerator positive(config.generator);
        for (size_t n = 0; n < config.negatives.size(); ++n) {
            SyntheticGenerator negative(negative_spec(config, config.negatives[n]));
            const uint64_t eval_seed = derive_seed(config.master_seed, "evaluate/eval",
                                                   static_cast<uint64_t>(l), n);
            Stopwatch watch;
            Rng rng(eval_seed);
            EvalReport report = evaluate(detector, positive, negative, config.eval_samples,
                                         config.train.target_tpr, rng);
            manifest.add_stage("evaluate/l" + std::to_string(l) + "/" + config.negatives[n].id,
                               watch.seconds(), eval_seed);
            grid << l << "," << config.negatives[n].id << "," << config.eval_samples << ","
                 << report.fpr_at_target << "," << report.auc << "," << report.tau << ","
                 << report.tpr << "\n";
        }
    }
    grid.close();
    manifest.add_artifact("eval_grid.csv");
    manifest.write(out_dir);
    std::printf("[evaluate] wrote %s/eval_grid.csv (%zu lengths x %zu negatives)\n",
                out_dir.c_str(), lengths.size(), config.negatives.size());
}

void cmd_ensemble(const ExperimentConfig& config, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    RunManifest manifest(config, "ensemble");
    if (config.negatives.empty()) {
        throw ConfigError("ensemble: config must list at least one negative model");
    }
    if (config.ensemble_sizes.empty()) {
        throw ConfigError("ensemble: config must list ensemble sizes");
    }
    const int max_n = *std::max_element(config.ensemble_sizes.begin(),
                                        config.ensemble_sizes.end());

    // Members are seeded by index so that growing the sweep reuses the
    // detectors already trained for smaller ensembles.
    std::vector<Detector> members;
    for (int i = 0; i < max_n; ++i) {
        const uint64_t seed =
            derive_seed(config.master_seed, "ensemble/member", static_cast<uint64_t>(i));
        Stopwatch watch;
        TrainConfig train = config.train;
        train.seed = seed;
        Rng rng(seed);
        members.push_back(certify(config.generator, train, rng));
        manifest.add_stage("ensemble/member" + std::to_string(i), watch.seconds(), seed);
        const std::string name = "detector_member_" + std::to_string(i) + ".afpd";
        save_detector(members.back(), out_dir + "/" + name);
        manifest.add_artifact(name);
    }

    std::ofstream sweep = open_report(out_dir + "/ensemble_sweep.csv", "authfp.ensemble-sweep.v1");
    sweep << "ensemble_size,negative_id,n_per_side,fpr_at_target,auc\n";
    for (size_t n = 0; n < config.negatives.size(); ++n) {
        for (int size : config.ensemble_sizes) {
            SyntheticGenerator positive(config.generator);
            SyntheticGenerator negative_fresh(negative_spec(config, config.negatives[n]));
            // Same eval seed across ensemble sizes: fixed evaluation set.
            const uint64_t eval_seed = derive_seed(config.master_seed, "ensemble/eval", n);
            Rng rng(eval_seed);
            EvalReport report = evaluate_ensemble(
                std::span<const Detector>(members.data(), static_cast<size_t>(size)), positive,
                negative_fresh, config.eval_samples, config.train.target_tpr, rng);
            sweep << size << "," << config.negatives[n].id << "," << config.eval_samples << ","
                  << report.fpr_at_target << "," << report.auc << "\n";
        }
    }
    sweep.close();
    manifest.add_artifact("ensemble_sweep.csv");
    manifest.write(out_dir);
    std::printf("[ensemble] wrote %s/ensemble_sweep.csv (max N=%d)\n", out_dir.c_str(), max_n);
}

namespace {

struct CampaignRow {
    std::string kind;
    std::string negative_id;
    int attempts = 0;
    int successes = 0;
    double steps_sum = 0.0;   // over successes
    double linf_sum = 0.0;    // over successes
    double l2_sum = 0.0;
    double ssim_sum = 0.0;
    double queries_sum = 0.0;  // over all attempts

    void add(const AttackReport& report) {
        ++attempts;
        queries_sum += report.detector_queries;
        if (report.success) {
            ++successes;
            steps_sum += report.steps_used;
            linf_sum += report.linf;
            l2_sum += report.l2;
            ssim_sum += report.ssim_proxy;
        }
    }

    void write(std::ofstream& out) const {
        out << kind << "," << negative_id << "," << attempts << ","
            << (attempts > 0 ? 100.0 * successes / attempts : 0.0) << ",";
        if (successes > 0) {
            out << steps_sum / successes << "," << linf_sum / successes << ","
                << l2_sum / successes << "," << ssim_sum / successes;
        } else {
            out << ",,,";
        }
        out << "," << (attempts > 0 ? queries_sum / attempts : 0.0) << "\n";
    }
};

/// Draws images from `source` that the oracle rejects.
std::vector<Image> rejected_starts(ImageSource& source, const VerdictOracle& accepts, int count,
                                   Rng& rng, const std::string& what) {
    std::vector<Image> starts;
    int attempts = 0;
    const int cap = count * 50;
    while (static_cast<int>(starts.size()) < count && attempts < cap) {
        Image image = source.sample(rng);
        ++attempts;
        if (!accepts(image)) starts.push_back(std::move(image));
    }
    if (static_cast<int>(starts.size()) < count) {
        throw Error("attack: could not collect " + std::to_string(count) + " rejected images for " +
                    what + " (negative barely distinguishable?)");
    }
    return starts;
}

}  // namespace

void cmd_attack(const ExperimentConfig& config, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    RunManifest manifest(config, "attack");
    if (config.negatives.empty()) {
        throw ConfigError("attack: config must list at least one negative model");
    }

    const uint64_t true_seed = derive_seed(config.master_seed, "attack/true-detector");
    Detector true_detector = obtain_detector(config, config.train.fingerprint_length, true_seed,
                                             manifest, "attack/true");

    // Surrogate: attacker runs the same procedure with its own seed and
    // guessed fingerprint length; equal training budget unless configured.
    TrainConfig surrogate_train = config.train;
    if (config.attack.surrogate_train_steps > 0) {
        surrogate_train.train_steps = config.attack.surrogate_train_steps;
    }
    const int guessed = config.attack.surrogate_guessed_length > 0
                            ? config.attack.surrogate_guessed_length
                            : config.train.fingerprint_length;
    const uint64_t surrogate_seed = derive_seed(config.master_seed, "attack/surrogate");
    Stopwatch surrogate_watch;
    SyntheticGenerator target_for_surrogate(config.generator);
    Rng surrogate_rng(surrogate_seed);
    Detector surrogate = train_surrogate(target_for_surrogate, nullptr, guessed, surrogate_train,
                                         surrogate_rng);
    manifest.add_stage("attack/surrogate", surrogate_watch.seconds(), surrogate_seed);
    std::printf("[attack] surrogate trained in %.1fs\n", surrogate_watch.seconds());

    const VerdictOracle true_oracle = [&](const Image& image) {
        return verify(true_detector, image) == Verdict::Authentic;
    };

    std::ofstream report = open_report(out_dir + "/attack_campaign.csv",
                                       "authfp.attack-campaign.v1");
    report << "detector_kind,negative_id,n_attempts,success_rate_pct,mean_steps_to_success,"
              "mean_linf,mean_l2,mean_ssim_proxy,mean_queries\n";

    for (size_t n = 0; n < config.negatives.size(); ++n) {
        const std::string& neg_id = config.negatives[n].id;
        SyntheticGenerator negative(negative_spec(config, config.negatives[n]));
        SyntheticGenerator target(config.generator);

        const uint64_t disc_seed = derive_seed(config.master_seed, "attack/discriminator", n);
        Stopwatch disc_watch;
        Rng disc_rng(disc_seed);
        Discriminator disc =
            train_discriminator(target, negative, config.attack.discriminator, disc_rng);
        manifest.add_stage("attack/discriminator/" + neg_id, disc_watch.seconds(), disc_seed);

        const VerdictOracle disc_oracle = [&](const Image& image) { return disc.accepts(image); };
        AttackObjective disc_objective = discriminator_objective(disc);
        AttackObjective whitebox = detection_error_objective(true_detector);
        AttackObjective surrogate_obj = detection_error_objective(surrogate);

        struct Setup {
            const char* kind;
            const AttackObjective* objective;
            const VerdictOracle* oracle;
        };
        const Setup setups[] = {
            {"discriminator-baseline", &disc_objective, &disc_oracle},
            {"whitebox-authprint", &whitebox, &true_oracle},
            {"surrogate-authprint", &surrogate_obj, &true_oracle},
        };

        for (const Setup& setup : setups) {
            const uint64_t run_seed = derive_seed(config.master_seed,
                                                  std::string("attack/run/") + setup.kind, n);
            Rng rng(run_seed);
            Stopwatch watch;
            std::vector<Image> starts = rejected_starts(negative, *setup.oracle,
                                                        config.attack.num_images, rng,
                                                        std::string(setup.kind) + " vs " + neg_id);
            CampaignRow row;
            row.kind = setup.kind;
            row.negative_id = neg_id;
            for (const Image& start : starts) {
                row.add(pgd_forge(start, *setup.objective, *setup.oracle, config.attack.pgd));
            }
            row.write(report);
            manifest.add_stage(std::string("attack/") + setup.kind + "/" + neg_id, watch.seconds(),
                               run_seed);
            std::printf("[attack] %s vs %s: SR %.1f%% (%d/%d) in %.1fs\n", setup.kind,
                        neg_id.c_str(), row.attempts ? 100.0 * row.successes / row.attempts : 0.0,
                        row.successes, row.attempts, watch.seconds());
        }
    }
    report.close();
    manifest.add_artifact("attack_campaign.csv");
    manifest.write(out_dir);
}

void cmd_recovery(const ExperimentConfig& config, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    RunManifest manifest(config, "recovery");
    const ExperimentConfig::Recovery& rec = config.recovery;

    const uint64_t detector_seed = derive_seed(config.master_seed, "recovery/detector");
    Detector detector = obtain_detector(config, config.train.fingerprint_length, detector_seed,
                                        manifest, "recovery");

    // Empirical delta^2 for zero-mode manipulation on authentic images.
    SyntheticGenerator source(config.generator);
    Rng delta_rng(derive_seed(config.master_seed, "recovery/delta-sq"));
    const double measured_delta_sq = measure_delta_sq(source, ManipulationMode::Zero, 0.0,
                                                      rec.delta_sq_samples, delta_rng);

    {
        std::ofstream k_table = open_report(out_dir + "/recovery_k.csv", "authfp.recovery-k.v1");
        k_table << "tau,l,delta_source,delta_sq,k\n";
        for (double tau : rec.tau_values) {
            for (int l : rec.l_values) {
                const double declared_sq = rec.delta * rec.delta;
                k_table << tau << "," << l << ",declared," << declared_sq << ","
                        << rejection_threshold(tau, l, rec.delta) << "\n";
                k_table << tau << "," << l << ",measured," << measured_delta_sq << ","
                        << rejection_threshold(tau, l, std::sqrt(measured_delta_sq)) << "\n";
            }
        }
        // The deployed detector's own tau with the measured perturbation scale.
        k_table << detector.tau << "," << detector.fingerprint_length() << ",measured,"
                << measured_delta_sq << ","
                << rejection_threshold(detector.tau, detector.fingerprint_length(),
                                       std::sqrt(measured_delta_sq))
                << "\n";
        manifest.add_artifact("recovery_k.csv");
    }

    {
        std::ofstream natgt = open_report(out_dir + "/recovery_natgt.csv",
                                          "authfp.recovery-natgt.v1");
        natgt << "l,k,ratio,queries\n";
        for (int l : rec.l_values) {
            const int k_min = std::max(1, (l + 31) / 32);  // ratio >= 1/32
            const int k_max = std::max(k_min, l / 2);      // ratio <= 1/2
            for (int k = k_min; k <= k_max; ++k) {
                natgt << l << "," << k << "," << static_cast<double>(k) / l << ","
                      << natgt_query_complexity(rec.natgt_dim, l, k) << "\n";
            }
        }
        manifest.add_artifact("recovery_natgt.csv");
    }

    {
        std::ofstream perm = open_report(out_dir + "/recovery_permutation.csv",
                                         "authfp.recovery-permutation.v1");
        perm << "l,log10_factorial\n";
        for (int l : rec.l_values) {
            perm << l << "," << permutation_complexity(l) << "\n";
        }
        manifest.add_artifact("recovery_permutation.csv");
    }

    {
        Stopwatch watch;
        const uint64_t sweep_seed = derive_seed(config.master_seed, "recovery/stability");
        Rng rng(sweep_seed);
        std::vector<StabilityRow> rows =
            stability_sweep(detector, source, rec.stability_m_values, rec.stability_trials, rng);
        std::ofstream stab = open_report(out_dir + "/recovery_stability.csv",
                                         "authfp.recovery-stability.v1");
        stab << "m,mean_l1_shift\n";
        for (const StabilityRow& row : rows) {
            stab << row.m << "," << row.mean_l1_shift << "\n";
        }
        manifest.add_stage("recovery/stability", watch.seconds(), sweep_seed);
        manifest.add_artifact("recovery_stability.csv");
    }

    manifest.set_field("measured_delta_sq", measured_delta_sq);
    manifest.write(out_dir);
    std::printf("[recovery] wrote 4 tables to %s (measured delta^2 = %.4f)\n", out_dir.c_str(),
                measured_delta_sq);
}

void cmd_serve(const std::vector<std::string>& artifact_paths, const ServiceConfig& service_config,
               const volatile sig_atomic_t* stop_requested) {
    std::vector<Detector> detectors;
    for (const std::string& path : artifact_paths) {
        detectors.push_back(load_detector(path));
    }
    VerificationService service(std::move(detectors), service_config);
    service.start();
    std::printf("[serve] listening on %s:%d (%zu detector%s)\n",
                service_config.bind_address.c_str(), service.port(), artifact_paths.size(),
                artifact_paths.size() == 1 ? "" : "s");
    std::fflush(stdout);
    while (!*stop_requested) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    service.stop();
    std::printf("[serve] shut down cleanly\n");
}

}  // namespace authfp
