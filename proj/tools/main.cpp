#include <CLI11.hpp>

#include <csignal>
#include <cstdio>

#include "authfp/commands.hpp"
#include "authfp/errors.hpp"

namespace {

volatile sig_atomic_t g_stop_requested = 0;

void handle_signal(int) {
    g_stop_requested = 1;
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    bool seed_set = false;
};

authfp::ExperimentConfig load_and_override(const CommonArgs& args) {
    authfp::ExperimentConfig config = authfp::load_config(args.config_path);
    if (args.seed_set) config.master_seed = args.seed;
    return config;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Experiment config JSON")->required();
    cmd->add_option("--out", args.out_dir, "Output directory (default: config output_dir)");
    cmd->add_option("--seed", args.seed, "Master seed override")
        ->each([&args](const std::string&) { args.seed_set = true; });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Covert-fingerprint certification and verification for image generators"};
    app.require_subcommand(1);

    CommonArgs certify_args, evaluate_args, ensemble_args, attack_args, recovery_args;
    add_common(app.add_subcommand("certify", "Train a detector and write its artifact"),
               certify_args);
    add_common(app.add_subcommand("evaluate", "FPR/AUC grid over lengths x negatives"),
               evaluate_args);
    add_common(app.add_subcommand("ensemble", "Max-MSE ensemble sweep"), ensemble_args);
    add_common(app.add_subcommand("attack", "PGD forgery campaign"), attack_args);
    add_common(app.add_subcommand("recovery", "Fingerprint-recovery cost tables"), recovery_args);

    std::vector<std::string> artifacts;
    authfp::ServiceConfig service;
    CLI::App* serve = app.add_subcommand("serve", "Host the verification API");
    serve->add_option("--artifact", artifacts, "Detector artifact path(s)")->required();
    serve->add_option("--bind", service.bind_address, "Bind address (default 127.0.0.1)");
    serve->add_option("--port", service.port, "Port (default: ephemeral)");
    serve->add_option("--token", service.tokens, "Bearer token(s) accepted by the API")->required();
    serve->add_option("--capacity", service.bucket_capacity, "Rate-limit bucket capacity");
    serve->add_option("--refill", service.refill_per_sec, "Rate-limit refill (tokens/second)");
    std::string policy = "any-accept";
    serve->add_option("--policy", policy, "Ensemble policy: any-accept | all-accept");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("certify")) {
            auto config = load_and_override(certify_args);
            authfp::cmd_certify(config, certify_args.out_dir.empty() ? config.output_dir
                                                                     : certify_args.out_dir);
        } else if (app.got_subcommand("evaluate")) {
            auto config = load_and_override(evaluate_args);
            authfp::cmd_evaluate(config, evaluate_args.out_dir.empty() ? config.output_dir
                                                                       : evaluate_args.out_dir);
        } else if (app.got_subcommand("ensemble")) {
            auto config = load_and_override(ensemble_args);
            authfp::cmd_ensemble(config, ensemble_args.out_dir.empty() ? config.output_dir
                                                                       : ensemble_args.out_dir);
        } else if (app.got_subcommand("attack")) {
            auto config = load_and_override(attack_args);
            authfp::cmd_attack(config, attack_args.out_dir.empty() ? config.output_dir
                                                                   : attack_args.out_dir);
        } else if (app.got_subcommand("recovery")) {
            auto config = load_and_override(recovery_args);
            authfp::cmd_recovery(config, recovery_args.out_dir.empty() ? config.output_dir
                                                                       : recovery_args.out_dir);
        } else if (app.got_subcommand("serve")) {
            if (policy == "any-accept") {
                service.policy = authfp::EnsemblePolicy::AnyAccept;
            } else if (policy == "all-accept") {
                service.policy = authfp::EnsemblePolicy::AllAccept;
            } else {
                throw authfp::ConfigError("serve: unknown policy '" + policy + "'");
            }
            std::signal(SIGINT, handle_signal);
            std::signal(SIGTERM, handle_signal);
            authfp::cmd_serve(artifacts, service, &g_stop_requested);
        }
    } catch (const authfp::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
