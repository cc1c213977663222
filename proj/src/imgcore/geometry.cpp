#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "fcb/error.hpp"
#include "fcb/imgcore.hpp"
#include "fcb/text.hpp"

namespace fcb {

std::array<double, 3> sample_bilinear(const ImagePlane& source, double x, double y,
                                      const std::array<std::uint8_t, 3>& fill) {
    const double fx0 = std::floor(x);
    const double fy0 = std::floor(y);
    const double wx = x - fx0;
    const double wy = y - fy0;
    const int x0 = static_cast<int>(fx0);
    const int y0 = static_cast<int>(fy0);

    auto tap = [&](int px, int py, int c) -> double {
        if (px < 0 || py < 0 || px >= source.width() || py >= source.height()) return fill[c];
        return source.at(px, py, c);
    };
    std::array<double, 3> out{};
    for (int c = 0; c < 3; ++c) {
        const double top = tap(x0, y0, c) * (1.0 - wx) + tap(x0 + 1, y0, c) * wx;
        const double bottom = tap(x0, y0 + 1, c) * (1.0 - wx) + tap(x0 + 1, y0 + 1, c) * wx;
        out[c] = top * (1.0 - wy) + bottom * wy;
    }
    return out;
}

ImagePlane bilinear_resize(const ImagePlane& source, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw GeometryError("resize target must be at least 1x1");
    const int w = source.width();
    const int h = source.height();
    if (out_w == w && out_h == h) return source;

    const double sx = static_cast<double>(w) / out_w;
    const double sy = static_cast<double>(h) / out_h;
    ImagePlane out(out_w, out_h);
    for (int j = 0; j < out_h; ++j) {
        const double y = std::clamp((j + 0.5) * sy - 0.5, 0.0, static_cast<double>(h - 1));
        const int y0 = static_cast<int>(y);
        const int y1 = std::min(y0 + 1, h - 1);
        const double wy = y - y0;
        for (int i = 0; i < out_w; ++i) {
            const double x = std::clamp((i + 0.5) * sx - 0.5, 0.0, static_cast<double>(w - 1));
            const int x0 = static_cast<int>(x);
            const int x1 = std::min(x0 + 1, w - 1);
            const double wx = x - x0;
            for (int c = 0; c < 3; ++c) {
                const double top = source.at(x0, y0, c) * (1.0 - wx) + source.at(x1, y0, c) * wx;
                const double bottom = source.at(x0, y1, c) * (1.0 - wx) + source.at(x1, y1, c) * wx;
                out.at(i, j, c) = to_u8(top * (1.0 - wy) + bottom * wy);
            }
        }
    }
    return out;
}

Similarity2 estimate_similarity(const Landmarks& from, const Landmarks& to) {
    const Eigen::RowVector2d from_mean = from.colwise().mean();
    const Eigen::RowVector2d to_mean = to.colwise().mean();
    const Landmarks p = from.rowwise() - from_mean;
    const Landmarks q = to.rowwise() - to_mean;

    const double denom = p.squaredNorm();
    if (!(denom > 0.0)) throw GeometryError("similarity source points are coincident");
    // Minimizes sum |[a -b; b a] p_k + t - q_k|^2.
    const double a = (p.col(0).dot(q.col(0)) + p.col(1).dot(q.col(1))) / denom;
    const double b = (p.col(0).dot(q.col(1)) - p.col(1).dot(q.col(0))) / denom;

    Similarity2 s;
    s.a = a;
    s.b = b;
    s.t = to_mean.transpose() - Eigen::Vector2d(a * from_mean.x() - b * from_mean.y(),
                                                b * from_mean.x() + a * from_mean.y());
    return s;
}

Landmarks reference_template_112() {
    Landmarks t;
    t << 38.2946, 51.6963,  //
        73.5318, 51.5014,   //
        56.0252, 71.7366,   //
        41.5493, 92.3655,   //
        70.7299, 92.2041;
    return t;
}

Landmarks alignment_template(int out_size) {
    return reference_template_112() * (static_cast<double>(out_size) / 112.0);
}

namespace {

void check_landmark_spread(const Landmarks& lm) {
    if (!lm.allFinite()) throw GeometryError("landmarks must be finite");
    const Landmarks centered = lm.rowwise() - lm.colwise().mean();
    const Eigen::JacobiSVD<Eigen::Matrix<double, 5, 2>> svd(centered);
    const auto sv = svd.singularValues();
    const double tol = 1e-9 * std::max(1.0, lm.cwiseAbs().maxCoeff());
    if (sv(0) <= tol) throw GeometryError("landmarks are coincident");
    if (sv(1) <= tol * std::max(1.0, sv(0))) throw GeometryError("landmarks are collinear");
}

}  // namespace

ImagePlane align_to_roi(const ImagePlane& source, const Landmarks& landmarks, int out_size,
                        const std::optional<Landmarks>& templ) {
    if (out_size < 1) throw GeometryError("ROI size must be >= 1");
    check_landmark_spread(landmarks);
    const Landmarks target = templ ? *templ : alignment_template(out_size);

    // Output -> source sampling map, estimated directly so exact inputs give
    // exact coefficients.
    const Similarity2 to_source = estimate_similarity(target, landmarks);
    constexpr std::array<std::uint8_t, 3> black = {0, 0, 0};

    ImagePlane out(out_size, out_size);
    for (int j = 0; j < out_size; ++j) {
        for (int i = 0; i < out_size; ++i) {
            const Eigen::Vector2d src = to_source.apply({i + 0.5, j + 0.5});
            const auto v = sample_bilinear(source, src.x() - 0.5, src.y() - 0.5, black);
            out.set_pixel(i, j, to_u8(v[0]), to_u8(v[1]), to_u8(v[2]));
        }
    }
    return out;
}

CropRect portrait_rect(const Landmarks& landmarks, const PortraitGeometry& geometry) {
    if (!landmarks.allFinite()) throw GeometryError("landmarks must be finite");
    if (!(geometry.width_per_ied > 0.0) || !(geometry.height_per_emd > 0.0)) {
        throw GeometryError("portrait ratios must be positive");
    }
    const Eigen::Vector2d eye_mid = 0.5 * (landmarks.row(0) + landmarks.row(1)).transpose();
    const Eigen::Vector2d mouth_mid = 0.5 * (landmarks.row(3) + landmarks.row(4)).transpose();
    const double ied = (landmarks.row(1) - landmarks.row(0)).norm();
    const double emd = (mouth_mid - eye_mid).norm();
    if (!(ied > 0.0)) throw GeometryError("inter-eye distance is zero");
    if (!(emd > 0.0)) throw GeometryError("eye-mouth distance is zero");

    CropRect r;
    r.width = static_cast<int>(text::round_half_away(geometry.width_per_ied * ied));
    r.height = static_cast<int>(text::round_half_away(geometry.height_per_emd * emd));
    if (r.width < 1 || r.height < 1) throw GeometryError("portrait crop rounds to an empty image");
    // Continuous left/top edges converted to pixel indices.
    r.left = static_cast<int>(text::round_half_away(eye_mid.x() - 0.5 * r.width));
    r.top = static_cast<int>(
        text::round_half_away(eye_mid.y() - geometry.eye_line_fraction * r.height));
    return r;
}

ImagePlane crop_portrait(const ImagePlane& source, const Landmarks& landmarks,
                         const PortraitGeometry& geometry) {
    const CropRect r = portrait_rect(landmarks, geometry);
    ImagePlane out(r.width, r.height);
    for (int j = 0; j < r.height; ++j) {
        const int sy = r.top + j;
        for (int i = 0; i < r.width; ++i) {
            const int sx = r.left + i;
            if (sx < 0 || sy < 0 || sx >= source.width() || sy >= source.height()) {
                out.set_pixel(i, j, geometry.fill[0], geometry.fill[1], geometry.fill[2]);
            } else {
                out.set_pixel(i, j, source.at(sx, sy, 0), source.at(sx, sy, 1), source.at(sx, sy, 2));
            }
        }
    }
    return out;
}

}  // namespace fcb
