#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "authfp/detector.hpp"

namespace authfp {

/// Per-credential token bucket. Buckets start full, refill continuously at
/// `refill_per_sec` up to `capacity`, and never overshoot. The clock source
/// is injectable so tests can drive time deterministically; the default is
/// the monotonic steady clock.
class TokenBucket {
public:
    using ClockFn = std::function<double()>;  // seconds, monotonic

    TokenBucket(double capacity, double refill_per_sec, ClockFn clock = {});

    /// Consumes one token for the credential if available.
    bool try_acquire(const std::string& credential);

    double capacity() const { return capacity_; }
    double refill_per_sec() const { return refill_per_sec_; }

private:
    struct Bucket {
        double tokens;
        double last_refill;
    };

    double capacity_;
    double refill_per_sec_;
    ClockFn clock_;
    std::mutex mutex_;
    std::unordered_map<std::string, Bucket> buckets_;
};

/// How an ensemble service combines member verdicts.
enum class EnsemblePolicy { AnyAccept, AllAccept };

struct ServiceConfig {
    std::string bind_address = "127.0.0.1";
    int port = 0;  // 0 picks an ephemeral port
    std::vector<std::string> tokens;
    double bucket_capacity = 60.0;
    double refill_per_sec = 1.0;
    EnsemblePolicy policy = EnsemblePolicy::AnyAccept;
    TokenBucket::ClockFn clock;  // test hook; default steady clock
};

/// Verifier-hosted verification API.
///
///   POST /verify  body: binary PGM/PPM, Authorization: Bearer <token>
///                 -> 200 {"authentic":true} | {"authentic":false}
///   GET  /healthz -> 200 {"status":"ok"}
///
/// The verdict payloads are the only two bodies /verify ever returns with
/// status 200; no error value, score, threshold or index data leaves the
/// boundary. 401 without a valid token, 429 over rate, 400 on malformed or
/// wrong-shape images, each with a fixed no-verdict body.
class VerificationService {
public:
    VerificationService(std::vector<Detector> detectors, ServiceConfig config);
    ~VerificationService();

    VerificationService(const VerificationService&) = delete;
    VerificationService& operator=(const VerificationService&) = delete;

    /// Binds and serves on a background thread. Throws on bind failure.
    void start();
    void stop();
    bool running() const;

    /// Port actually bound (resolves ephemeral port requests).
    int port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace authfp
