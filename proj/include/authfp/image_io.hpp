#pragma once

#include <string>
#include <vector>

#include "authfp/image.hpp"

namespace authfp {

/// Encodes to binary PGM (P5) for single-channel images and binary PPM (P6)
/// for three-channel images, 8-bit, maxval 255. Pixel p is stored as
/// round(p * 255). This is the project's only image interchange format.
std::vector<unsigned char> encode_pnm(const Image& image);

/// Decodes a P5/P6 buffer; pixel values are mapped back to [0,1].
/// Throws IngestionError on malformed input; `origin` names the source
/// in error messages.
Image decode_pnm(const unsigned char* data, size_t size, const std::string& origin = "<memory>");
Image decode_pnm(const std::vector<unsigned char>& data, const std::string& origin = "<memory>");

void save_pnm(const Image& image, const std::string& path);
Image load_pnm(const std::string& path);

}  // namespace authfp
