#pragma once

#include <cstddef>
#include <vector>

namespace omnisplat {

// Row-major H x W x 3 image, double channels. Loaded pixel data lives in
// [0, 1]; intermediate buffers (gradients, differences) use the same layout.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> data;  // size width * height * 3

    Image() = default;
    Image(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0.0) {}

    double& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    double at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    bool same_size(const Image& o) const { return width == o.width && height == o.height; }
};

}  // namespace omnisplat
