#pragma once

#include <Eigen/Dense>
#include <string>

namespace authfp {

struct ImageShape {
    int channels = 1;
    int height = 0;
    int width = 0;

    int dim() const { return channels * height * width; }
    bool operator==(const ImageShape&) const = default;
};

/// Flat pixel vector in [0,1], row-major within a channel, channel-major
/// overall: pixel (c, y, x) lives at index c*H*W + y*W + x.
struct Image {
    ImageShape shape;
    Eigen::VectorXd pixels;

    double& at(int c, int y, int x) {
        return pixels[(c * shape.height + y) * shape.width + x];
    }
    double at(int c, int y, int x) const {
        return pixels[(c * shape.height + y) * shape.width + x];
    }
};

std::string to_string(const ImageShape& shape);

}  // namespace authfp
