#pragma once

#include <string>
#include <vector>

#include "authfp/detector.hpp"

namespace authfp {

/// Detector artifact binary layout, all little-endian:
///
///   magic "AFPD" | version u32 | d u32 | l u32 | sampling u8
///   | n_layers u32 | per layer: in u32, out u32, activation u8
///   | tau f64
///   | indices: l x u32
///   | per layer: weights f32 row-major (out x in), bias f32 (out)
///   | crc32 u32 of all preceding bytes
///
/// Weights are stored at 32 bits; in-memory math stays at 64. The header is
/// self-describing: (d, l, layer dims) fully determine the network shape.
inline constexpr char kArtifactMagic[4] = {'A', 'F', 'P', 'D'};
inline constexpr uint32_t kArtifactVersion = 1;

std::vector<unsigned char> encode_detector(const Detector& detector);
Detector decode_detector(const std::vector<unsigned char>& bytes,
                         const std::string& origin = "<memory>");

/// Byte-deterministic for a given detector.
void save_detector(const Detector& detector, const std::string& path);

/// Validates magic, version, CRC and dimension chaining; never returns a
/// detector that fails invariants. Distinct error types per corruption.
Detector load_detector(const std::string& path);

}  // namespace authfp
