#include "authfp/image_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "authfp/errors.hpp"

namespace authfp {
namespace {

int quantize8(double p) {
    double v = std::lround(p * 255.0);
    return static_cast<int>(std::min(255.0, std::max(0.0, v)));
}

struct Cursor {
    const unsigned char* data;
    size_t size;
    size_t pos = 0;
    const std::string& origin;

    [[noreturn]] void fail(const std::string& why) const {
        throw IngestionError("malformed image '" + origin + "': " + why);
    }

    int get() {
        if (pos >= size) fail("unexpected end of data");
        return data[pos++];
    }

    void skip_whitespace_and_comments() {
        while (pos < size) {
            int c = data[pos];
            if (c == '#') {
                while (pos < size && data[pos] != '\n') ++pos;
            } else if (std::isspace(c)) {
                ++pos;
            } else {
                break;
            }
        }
    }

    int read_int() {
        skip_whitespace_and_comments();
        if (pos >= size || !std::isdigit(data[pos])) fail("expected integer in header");
        long v = 0;
        while (pos < size && std::isdigit(data[pos])) {
            v = v * 10 + (data[pos++] - '0');
            if (v > (1L << 24)) fail("header integer out of range");
        }
        return static_cast<int>(v);
    }
};

}  // namespace

std::string to_string(const ImageShape& shape) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%dx%dx%d", shape.channels, shape.height, shape.width);
    return buf;
}

std::vector<unsigned char> encode_pnm(const Image& image) {
    const ImageShape& s = image.shape;
    if (s.channels != 1 && s.channels != 3) {
        throw InvalidArgumentError("encode_pnm: only 1- or 3-channel images, got " +
                                   std::to_string(s.channels));
    }
    std::string header = std::string(s.channels == 1 ? "P5" : "P6") + "\n" +
                         std::to_string(s.width) + " " + std::to_string(s.height) + "\n255\n";
    std::vector<unsigned char> out(header.begin(), header.end());
    out.reserve(out.size() + static_cast<size_t>(s.dim()));
    // PNM interleaves channels per pixel; our layout is channel-major.
    for (int y = 0; y < s.height; ++y) {
        for (int x = 0; x < s.width; ++x) {
            for (int c = 0; c < s.channels; ++c) {
                out.push_back(static_cast<unsigned char>(quantize8(image.at(c, y, x))));
            }
        }
    }
    return out;
}

Image decode_pnm(const unsigned char* data, size_t size, const std::string& origin) {
    Cursor cur{data, size, 0, origin};
    if (size < 2) cur.fail("too short for a PNM header");
    if (data[0] != 'P' || (data[1] != '5' && data[1] != '6')) {
        cur.fail("not a binary PGM (P5) or PPM (P6) file");
    }
    const int channels = data[1] == '5' ? 1 : 3;
    cur.pos = 2;
    const int width = cur.read_int();
    const int height = cur.read_int();
    const int maxval = cur.read_int();
    if (width <= 0 || height <= 0) cur.fail("non-positive dimensions");
    if (maxval != 255) cur.fail("unsupported maxval " + std::to_string(maxval) + " (want 255)");
    // Exactly one whitespace byte separates the header from the raster.
    cur.get();

    Image image;
    image.shape = {channels, height, width};
    const size_t need = static_cast<size_t>(image.shape.dim());
    if (size - cur.pos < need) cur.fail("raster shorter than declared dimensions");
    image.pixels.resize(image.shape.dim());
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < channels; ++c) {
                image.at(c, y, x) = static_cast<double>(data[cur.pos++]) / 255.0;
            }
        }
    }
    return image;
}

Image decode_pnm(const std::vector<unsigned char>& data, const std::string& origin) {
    return decode_pnm(data.data(), data.size(), origin);
}

void save_pnm(const Image& image, const std::string& path) {
    std::vector<unsigned char> bytes = encode_pnm(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PersistenceError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw PersistenceError("short write to '" + path + "'");
}

Image load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestionError("cannot open image file '" + path + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return decode_pnm(bytes.data(), bytes.size(), path);
}

}  // namespace authfp
