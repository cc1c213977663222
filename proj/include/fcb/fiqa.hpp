#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fcb/image.hpp"

namespace fcb {

struct QualityScore {
    std::string image_id;
    std::string method;
    double value = 0.0;
};

/// Rec.601 luma in [0, 1]: (0.299 R + 0.587 G + 0.114 B) / 255.
template <typename Scalar = double>
Plane<Scalar> to_gray(const ImagePlane& image) {
    Plane<Scalar> out(image.height(), image.width());
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            const int luma = 299 * image.at(x, y, 0) + 587 * image.at(x, y, 1) + 114 * image.at(x, y, 2);
            out(y, x) = static_cast<Scalar>(luma) / Scalar(255000);
        }
    }
    return out;
}

/// 3x3 mean with replicate-edge padding.
template <typename Derived>
Plane<typename Derived::Scalar> box_blur_3x3(const Eigen::ArrayBase<Derived>& plane) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index h = plane.rows(), w = plane.cols();
    Plane<Scalar> out(h, w);
    for (Eigen::Index y = 0; y < h; ++y) {
        for (Eigen::Index x = 0; x < w; ++x) {
            Scalar sum(0);
            for (Eigen::Index dy = -1; dy <= 1; ++dy) {
                const Eigen::Index yy = std::clamp<Eigen::Index>(y + dy, 0, h - 1);
                for (Eigen::Index dx = -1; dx <= 1; ++dx) {
                    sum += plane(yy, std::clamp<Eigen::Index>(x + dx, 0, w - 1));
                }
            }
            out(y, x) = sum / Scalar(9);
        }
    }
    return out;
}

/// Mean |gray - box_blur_3x3(gray)|. Evaluated in exact integer arithmetic on
/// the luma scale, so symmetric transforms of the image give identical bits.
double sharpness2(const ImagePlane& image);

struct Sharpness1Options {
    /// Length of the horizontal and vertical uniform blur kernels (odd).
    int kernel_length = 9;
};

/// Blur-annoyance based sharpness: 1 - b where b is the larger, over the two
/// directions, of the share of neighbour variation that survives a strong
/// directional blur. A direction without variation is skipped; an image
/// without any variation scores 0. Requires width and height >= 2.
double sharpness1(const ImagePlane& image, const Sharpness1Options& options = {});

/// Built-in metric names accepted by score_builtin.
inline constexpr const char* kSharpness1 = "sharpness1";
inline constexpr const char* kSharpness2 = "sharpness2";
bool is_builtin_metric(const std::string& method);
QualityScore score_builtin(const std::string& method, const std::string& image_id, const ImagePlane& image);

/// Where an external model's per-image output comes from: a shell command
/// speaking the line protocol, or a precomputed two-column file.
///
/// Protocol: one absolute image path per line on stdin; the plugin prints
/// "path<TAB>payload" lines and exits 0.
struct PluginSource {
    std::string command;
    std::filesystem::path file;
    /// Images are bilinear-resized to size x size before a command sees them.
    std::optional<int> input_size;
};

/// Raw per-image plugin output: `payload` when the plugin answered exactly
/// once for the path, `error` otherwise.
struct PluginField {
    std::filesystem::path path;
    std::optional<std::string> payload;
    std::string error;
};

/// Runs or reads the plugin for `images` and matches answers by path. Throws
/// PluginError when the command cannot run, exits nonzero, or answers a path
/// it was not asked about.
std::vector<PluginField> run_plugin(const PluginSource& source, const std::vector<std::filesystem::path>& images);

struct ScorerPlugin {
    std::string name;
    PluginSource source;
};

struct PluginScore {
    std::filesystem::path path;
    std::optional<double> value;
    std::string error;
};

/// One result per requested image, in request order.
std::vector<PluginScore> score_with_plugin(const ScorerPlugin& plugin,
                                           const std::vector<std::filesystem::path>& images);

}  // namespace fcb
