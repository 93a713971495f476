#include "authfp/artifact.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

#include "authfp/errors.hpp"

namespace authfp {
namespace {

void put_u32(std::vector<unsigned char>& out, uint32_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xFF));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
    out.push_back(static_cast<unsigned char>((v >> 24) & 0xFF));
}

void put_f32(std::vector<unsigned char>& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u32(out, bits);
}

void put_f64(std::vector<unsigned char>& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u32(out, static_cast<uint32_t>(bits & 0xFFFFFFFFull));
    put_u32(out, static_cast<uint32_t>(bits >> 32));
}

uint32_t checksum(const std::vector<unsigned char>& bytes, size_t count) {
    return static_cast<uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(count)));
}

struct Reader {
    const std::vector<unsigned char>& bytes;
    size_t pos = 0;
    const std::string& origin;

    void need(size_t n) const {
        if (pos + n > bytes.size()) {
            throw TruncatedFileError("detector artifact '" + origin + "' truncated at byte " +
                                     std::to_string(pos));
        }
    }
    uint32_t u32() {
        need(4);
        uint32_t v = static_cast<uint32_t>(bytes[pos]) | (static_cast<uint32_t>(bytes[pos + 1]) << 8) |
                     (static_cast<uint32_t>(bytes[pos + 2]) << 16) |
                     (static_cast<uint32_t>(bytes[pos + 3]) << 24);
        pos += 4;
        return v;
    }
    uint8_t u8() {
        need(1);
        return bytes[pos++];
    }
    float f32() {
        uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
    double f64() {
        uint64_t lo = u32();
        uint64_t hi = u32();
        uint64_t bits = lo | (hi << 32);
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
};

uint8_t activation_tag(Activation act) {
    switch (act) {
        case Activation::LeakyRelu: return 0;
        case Activation::Tanh: return 1;
        case Activation::Identity: return 2;
    }
    return 2;
}

Activation activation_from_tag(uint8_t tag, const std::string& origin) {
    switch (tag) {
        case 0: return Activation::LeakyRelu;
        case 1: return Activation::Tanh;
        case 2: return Activation::Identity;
        default:
            throw PersistenceError("detector artifact '" + origin + "' has unknown activation tag " +
                                   std::to_string(tag));
    }
}

}  // namespace

std::vector<unsigned char> encode_detector(const Detector& detector) {
    detector.reconstructor.check_consistent();
    if (detector.reconstructor.input_dim() != detector.dim() ||
        detector.reconstructor.output_dim() != detector.fingerprint_length()) {
        throw InvalidArgumentError("encode_detector: reconstructor dims do not match (d, l)");
    }
    if (!(detector.tau >= 0.0)) {
        throw InvalidArgumentError("encode_detector: detector has no calibrated threshold");
    }
    for (uint32_t idx : detector.indices.indices) {
        if (idx >= static_cast<uint32_t>(detector.dim())) {
            throw InvalidArgumentError("encode_detector: index " + std::to_string(idx) +
                                       " out of range for d=" + std::to_string(detector.dim()));
        }
    }
    std::vector<unsigned char> out;
    out.insert(out.end(), kArtifactMagic, kArtifactMagic + 4);
    put_u32(out, kArtifactVersion);
    put_u32(out, static_cast<uint32_t>(detector.dim()));
    put_u32(out, static_cast<uint32_t>(detector.fingerprint_length()));
    out.push_back(detector.sampling == IndexSampling::WithReplacement ? 0 : 1);
    put_u32(out, static_cast<uint32_t>(detector.reconstructor.layers.size()));
    for (const Layer& layer : detector.reconstructor.layers) {
        put_u32(out, static_cast<uint32_t>(layer.in_dim()));
        put_u32(out, static_cast<uint32_t>(layer.out_dim()));
        out.push_back(activation_tag(layer.activation));
    }
    put_f64(out, detector.tau);
    for (uint32_t idx : detector.indices.indices) put_u32(out, idx);
    for (const Layer& layer : detector.reconstructor.layers) {
        for (int r = 0; r < layer.out_dim(); ++r) {
            for (int c = 0; c < layer.in_dim(); ++c) {
                put_f32(out, static_cast<float>(layer.weights(r, c)));
            }
        }
        for (int r = 0; r < layer.out_dim(); ++r) put_f32(out, static_cast<float>(layer.bias[r]));
    }
    put_u32(out, checksum(out, out.size()));
    return out;
}

Detector decode_detector(const std::vector<unsigned char>& bytes, const std::string& origin) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kArtifactMagic, 4) != 0) {
        throw UnsupportedFormatError("'" + origin + "' is not a detector artifact (bad magic)");
    }

    Reader r{bytes, 4, origin};
    const uint32_t version = r.u32();
    if (version != kArtifactVersion) {
        throw UnknownVersionError("detector artifact '" + origin + "' has version " +
                                  std::to_string(version) + ", this build reads " +
                                  std::to_string(kArtifactVersion));
    }
    const uint32_t d = r.u32();
    const uint32_t l = r.u32();
    const uint8_t sampling = r.u8();
    if (d == 0 || l == 0 || sampling > 1) {
        throw PersistenceError("detector artifact '" + origin + "' has invalid header fields");
    }
    const uint32_t n_layers = r.u32();
    if (n_layers == 0 || n_layers > 64) {
        throw PersistenceError("detector artifact '" + origin + "' has implausible layer count " +
                               std::to_string(n_layers));
    }

    Detector detector;
    detector.sampling = sampling == 0 ? IndexSampling::WithReplacement
                                      : IndexSampling::WithoutReplacement;
    std::vector<std::pair<uint32_t, uint32_t>> dims;
    std::vector<Activation> acts;
    for (uint32_t i = 0; i < n_layers; ++i) {
        const uint32_t in = r.u32();
        const uint32_t out = r.u32();
        acts.push_back(activation_from_tag(r.u8(), origin));
        dims.emplace_back(in, out);
    }
    if (dims.front().first != d || dims.back().second != l) {
        throw PersistenceError("detector artifact '" + origin +
                               "' layer dims do not match header (d, l)");
    }
    size_t param_count = 0;
    for (size_t i = 0; i < dims.size(); ++i) {
        if (i + 1 < dims.size() && dims[i].second != dims[i + 1].first) {
            throw PersistenceError("detector artifact '" + origin +
                                   "' layer dims do not chain at layer " + std::to_string(i));
        }
        param_count += static_cast<size_t>(dims[i].first) * dims[i].second + dims[i].second;
    }

    // Length implied by the header: tau + indices + f32 params + trailing CRC.
    const size_t expected = r.pos + 8 + 4ull * l + 4ull * param_count + 4;
    if (bytes.size() < expected) {
        throw TruncatedFileError("detector artifact '" + origin + "' truncated: have " +
                                 std::to_string(bytes.size()) + " bytes, header implies " +
                                 std::to_string(expected));
    }
    if (bytes.size() > expected) {
        throw PersistenceError("detector artifact '" + origin + "' has " +
                               std::to_string(bytes.size() - expected) + " trailing bytes");
    }
    Reader tail{bytes, bytes.size() - 4, origin};
    if (checksum(bytes, bytes.size() - 4) != tail.u32()) {
        throw ChecksumError("detector artifact '" + origin + "' failed CRC-32 validation");
    }

    detector.tau = r.f64();
    if (!(detector.tau >= 0.0)) {
        throw PersistenceError("detector artifact '" + origin + "' has negative threshold");
    }
    detector.indices.dim = static_cast<int>(d);
    detector.indices.indices.reserve(l);
    for (uint32_t j = 0; j < l; ++j) {
        const uint32_t idx = r.u32();
        if (idx >= d) {
            throw PersistenceError("detector artifact '" + origin + "' has index " +
                                   std::to_string(idx) + " out of range for d=" + std::to_string(d));
        }
        detector.indices.indices.push_back(idx);
    }
    for (uint32_t i = 0; i < n_layers; ++i) {
        Layer layer;
        layer.activation = acts[i];
        layer.weights.resize(dims[i].second, dims[i].first);
        for (uint32_t row = 0; row < dims[i].second; ++row) {
            for (uint32_t col = 0; col < dims[i].first; ++col) {
                layer.weights(row, col) = static_cast<double>(r.f32());
            }
        }
        layer.bias.resize(dims[i].second);
        for (uint32_t row = 0; row < dims[i].second; ++row) {
            layer.bias[row] = static_cast<double>(r.f32());
        }
        detector.reconstructor.layers.push_back(std::move(layer));
    }
    detector.reconstructor.check_consistent();
    return detector;
}

void save_detector(const Detector& detector, const std::string& path) {
    std::vector<unsigned char> bytes = encode_detector(detector);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PersistenceError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw PersistenceError("short write to '" + path + "'");
}

Detector load_detector(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PersistenceError("cannot open detector artifact '" + path + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return decode_detector(bytes, path);
}

}  // namespace authfp
