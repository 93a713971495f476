#include "authfp/service.hpp"

#include "authfp/httplib_compat.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include "authfp/errors.hpp"
#include "authfp/image_io.hpp"

namespace authfp {
namespace {

double steady_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// Fixed response bodies. The two verdict payloads are byte-exact constants;
// every other body carries no verdict or numeric data.
constexpr const char* kBodyAuthentic = "{\"authentic\":true}";
constexpr const char* kBodyNotAuthentic = "{\"authentic\":false}";
constexpr const char* kBodyUnauthorized = "{\"error\":\"unauthorized\"}";
constexpr const char* kBodyRateLimited = "{\"error\":\"rate_limited\"}";
constexpr const char* kBodyBadImage = "{\"error\":\"bad_image\"}";
constexpr const char* kBodyHealthy = "{\"status\":\"ok\"}";

}  // namespace

TokenBucket::TokenBucket(double capacity, double refill_per_sec, ClockFn clock)
    : capacity_(capacity),
      refill_per_sec_(refill_per_sec),
      clock_(clock ? std::move(clock) : steady_seconds) {
    if (!(capacity_ >= 1.0)) throw InvalidArgumentError("token bucket: capacity must be >= 1");
    if (refill_per_sec_ < 0.0) throw InvalidArgumentError("token bucket: refill must be >= 0");
}

bool TokenBucket::try_acquire(const std::string& credential) {
    const double now = clock_();
    std::lock_guard<std::mutex> lock(mutex_);
    auto [it, inserted] = buckets_.try_emplace(credential, Bucket{capacity_, now});
    Bucket& bucket = it->second;
    if (!inserted) {
        const double elapsed = std::max(0.0, now - bucket.last_refill);
        bucket.tokens = std::min(capacity_, bucket.tokens + elapsed * refill_per_sec_);
        bucket.last_refill = now;
    }
    if (bucket.tokens >= 1.0) {
        bucket.tokens -= 1.0;
        return true;
    }
    return false;
}

struct VerificationService::Impl {
    std::vector<Detector> detectors;
    ServiceConfig config;
    TokenBucket bucket;
    httplib::Server server;
    std::thread thread;
    std::atomic<bool> running{false};
    int bound_port = 0;

    Impl(std::vector<Detector> dets, ServiceConfig cfg)
        : detectors(std::move(dets)),
          config(std::move(cfg)),
          bucket(config.bucket_capacity, config.refill_per_sec, config.clock) {}

    bool verdict(const Image& image) const {
        if (detectors.size() == 1) {
            return verify(detectors[0], image) == Verdict::Authentic;
        }
        if (config.policy == EnsemblePolicy::AnyAccept) {
            return ensemble_verify_any_accept(detectors, image) == Verdict::Authentic;
        }
        for (const Detector& d : detectors) {
            if (verify(d, image) != Verdict::Authentic) return false;
        }
        return true;
    }

    void handle_verify(const httplib::Request& req, httplib::Response& res) {
        const std::string auth = req.get_header_value("Authorization");
        std::string token;
        if (auth.rfind("Bearer ", 0) == 0) token = auth.substr(7);
        bool known = false;
        for (const std::string& t : config.tokens) known = known || (t == token);
        if (!known) {
            res.status = 401;
            res.set_content(kBodyUnauthorized, "application/json");
            return;
        }
        if (!bucket.try_acquire(token)) {
            res.status = 429;
            res.set_content(kBodyRateLimited, "application/json");
            return;
        }
        Image image;
        try {
            image = decode_pnm(reinterpret_cast<const unsigned char*>(req.body.data()),
                               req.body.size(), "request-body");
        } catch (const Error&) {
            res.status = 400;
            res.set_content(kBodyBadImage, "application/json");
            return;
        }
        if (image.shape.dim() != detectors.front().dim()) {
            res.status = 400;
            res.set_content(kBodyBadImage, "application/json");
            return;
        }
        res.status = 200;
        res.set_content(verdict(image) ? kBodyAuthentic : kBodyNotAuthentic, "application/json");
    }
};

VerificationService::VerificationService(std::vector<Detector> detectors, ServiceConfig config)
    : impl_(std::make_unique<Impl>(std::move(detectors), std::move(config))) {
    if (impl_->detectors.empty()) {
        throw InvalidArgumentError("service: at least one detector required");
    }
    if (impl_->config.tokens.empty()) {
        throw InvalidArgumentError("service: at least one auth token required");
    }
    for (const Detector& d : impl_->detectors) {
        if (d.dim() != impl_->detectors.front().dim()) {
            throw InvalidArgumentError("service: ensemble members disagree on image dimension");
        }
    }

    impl_->server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        res.status = 200;
        res.set_content(kBodyHealthy, "application/json");
    });
    Impl* impl = impl_.get();
    impl_->server.Post("/verify", [impl](const httplib::Request& req, httplib::Response& res) {
        impl->handle_verify(req, res);
    });
}

VerificationService::~VerificationService() {
    stop();
}

void VerificationService::start() {
    if (impl_->running.load()) return;
    if (impl_->config.port == 0) {
        impl_->bound_port = impl_->server.bind_to_any_port(impl_->config.bind_address);
        if (impl_->bound_port <= 0) {
            throw Error("service: failed to bind " + impl_->config.bind_address);
        }
    } else {
        if (!impl_->server.bind_to_port(impl_->config.bind_address, impl_->config.port)) {
            throw Error("service: failed to bind " + impl_->config.bind_address + ":" +
                        std::to_string(impl_->config.port));
        }
        impl_->bound_port = impl_->config.port;
    }
    impl_->running.store(true);
    impl_->thread = std::thread([this]() { impl_->server.listen_after_bind(); });
    // Wait until the server's accept loop is live.
    while (!impl_->server.is_running()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
}

void VerificationService::stop() {
    if (!impl_->running.exchange(false)) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

bool VerificationService::running() const {
    return impl_->running.load();
}

int VerificationService::port() const {
    return impl_->bound_port;
}

}  // namespace authfp
