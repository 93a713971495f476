#pragma once

#include <csignal>
#include <string>

#include "authfp/config.hpp"
#include "authfp/service.hpp"

namespace authfp {

/// Experiment-runner commands. Each writes its reports plus a manifest under
/// `out_dir` and is deterministic given (config, master seed) apart from
/// wall-clock fields. Errors surface as exceptions; the CLI maps them to
/// exit codes (config error 2, runtime error 3).

/// Trains a detector per the config and writes detector.afpd.
void cmd_certify(const ExperimentConfig& config, const std::string& out_dir);

/// FPR@targetTPR / AUC grid over fingerprint lengths x negative models.
void cmd_evaluate(const ExperimentConfig& config, const std::string& out_dir);

/// Max-MSE ensemble sweep over the configured ensemble sizes.
void cmd_ensemble(const ExperimentConfig& config, const std::string& out_dir);

/// PGD forgery campaign: discriminator-baseline, surrogate, white-box.
void cmd_attack(const ExperimentConfig& config, const std::string& out_dir);

/// Recovery-cost tables: rejection threshold k, NATGT query-complexity grid,
/// permutation search cost, and the empirical reconstructor stability sweep.
void cmd_recovery(const ExperimentConfig& config, const std::string& out_dir);

/// Loads detector artifact(s) and serves the verification API until
/// `stop_requested` flips true (the CLI wires this to SIGINT/SIGTERM).
void cmd_serve(const std::vector<std::string>& artifact_paths, const ServiceConfig& service_config,
               const volatile sig_atomic_t* stop_requested);

}  // namespace authfp
