#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace fcb {

/// Interleaved 8-bit RGB raster, row-major. The unit every codec and metric
/// consumes.
class ImagePlane {
public:
    static constexpr int kChannels = 3;

    ImagePlane() = default;
    ImagePlane(int width, int height, std::uint8_t fill = 0);
    ImagePlane(int width, int height, std::vector<std::uint8_t> samples);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return samples_.empty(); }

    std::uint8_t& at(int x, int y, int c) { return samples_[index(x, y, c)]; }
    std::uint8_t at(int x, int y, int c) const { return samples_[index(x, y, c)]; }

    void set_pixel(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);

    std::span<const std::uint8_t> samples() const noexcept { return samples_; }
    std::span<std::uint8_t> samples() noexcept { return samples_; }

    friend bool operator==(const ImagePlane&, const ImagePlane&) = default;

private:
    std::size_t index(int x, int y, int c) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> samples_;
};

/// Single-channel real plane, rows = image height. Used for luminance.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using PlaneD = Plane<double>;

/// Five facial landmarks, one (x, y) per row, in continuous pixel
/// coordinates (pixel (i, j) covers [i, i+1) x [j, j+1)). Row order: the two
/// eyes (image-left first), nose tip, the two mouth corners (image-left first).
using Landmarks = Eigen::Matrix<double, 5, 2>;

/// Round half away from zero and clamp into [0, 255].
inline std::uint8_t to_u8(double v) {
    if (!(v > 0.0)) return 0;
    if (v >= 255.0) return 255;
    return static_cast<std::uint8_t>(v + 0.5);
}

}  // namespace fcb
