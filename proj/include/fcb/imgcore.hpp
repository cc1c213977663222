#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fcb/image.hpp"

namespace fcb {

// ---------------------------------------------------------------------------
// Dataset manifest

enum class Variant { roi, portrait };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

struct ImageRecord {
    std::string image_id;
    std::string subject_id;
    std::string capture_id;
    std::filesystem::path path;
    std::optional<Landmarks> landmarks;

    friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct DatasetManifest {
    std::vector<ImageRecord> records;
    Variant variant = Variant::roi;

    std::size_t subject_count() const;
    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// Reads a manifest: header line required, tab or comma separated (detected
/// from the header), columns image_id, subject_id, capture_id, path and
/// optionally x1,y1,...,x5,y5. A leading `# variant=<roi|portrait>` line
/// sets the variant. Relative paths resolve against the manifest directory.
/// Throws ParseError with the offending row number.
DatasetManifest load_manifest(const std::filesystem::path& file);
DatasetManifest parse_manifest(const std::string& text,
                               const std::filesystem::path& base_dir = {});

/// Tab-separated serialization readable by load_manifest. Paths are written
/// relative to `base_dir` when they lie under it.
std::string serialize_manifest(const DatasetManifest& manifest,
                               const std::filesystem::path& base_dir = {});
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& file);

// ---------------------------------------------------------------------------
// Lossless image files

/// Decodes PNG (8/16-bit, gray/RGB, with or without alpha) or binary PPM/PGM
/// into RGB8. Throws DecodeError.
ImagePlane read_image(const std::filesystem::path& file);
ImagePlane decode_png(std::span<const std::uint8_t> bytes);

/// All row filters considered; level 9 is the maximum zlib effort.
std::vector<std::uint8_t> encode_png(const ImagePlane& image, int zlib_level = 9);
void write_png(const ImagePlane& image, const std::filesystem::path& file, int zlib_level = 9);

// ---------------------------------------------------------------------------
// Geometry

/// Bilinear resampling with half-pixel centers: output pixel (i, j) samples
/// the source at ((i+0.5)*w/out_w - 0.5, (j+0.5)*h/out_h - 0.5), clamped to
/// the source bounds.
ImagePlane bilinear_resize(const ImagePlane& source, int out_w, int out_h);

/// Bilinear sample at a source index-space position. Taps outside the image
/// take `fill`.
std::array<double, 3> sample_bilinear(const ImagePlane& source, double x, double y,
                                      const std::array<std::uint8_t, 3>& fill);

/// 2D similarity (rotation + uniform scale + translation):
/// p' = [a -b; b a] p + t.
struct Similarity2 {
    double a = 1.0;
    double b = 0.0;
    Eigen::Vector2d t = Eigen::Vector2d::Zero();

    Eigen::Vector2d apply(const Eigen::Vector2d& p) const {
        return {a * p.x() - b * p.y() + t.x(), b * p.x() + a * p.y() + t.y()};
    }
    double scale() const { return std::hypot(a, b); }
};

/// Closed-form least-squares similarity mapping `from` onto `to`.
Similarity2 estimate_similarity(const Landmarks& from, const Landmarks& to);

/// Five-point alignment template for a 112x112 crop, the convention of the
/// common ArcFace-style recognizers.
Landmarks reference_template_112();

/// The 112 template linearly scaled to an out_size x out_size crop.
Landmarks alignment_template(int out_size);

/// Warps `source` so that `landmarks` land on `templ` (defaults to
/// alignment_template(out_size)). Out-of-bounds samples are black.
/// Throws GeometryError on coincident or collinear landmarks.
ImagePlane align_to_roi(const ImagePlane& source, const Landmarks& landmarks,
                        int out_size = 250,
                        const std::optional<Landmarks>& templ = std::nullopt);

/// Portrait crop sized from inter-eye (IED) and eye-mouth (EMD) distance.
/// The ratios are operator configuration; the defaults are not taken from
/// any standard text.
struct PortraitGeometry {
    double width_per_ied = 4.0;
    double height_per_emd = 5.0;
    /// Eye line position as a fraction of the crop height, from the top.
    double eye_line_fraction = 0.45;
    std::array<std::uint8_t, 3> fill = {0, 0, 0};
};

struct CropRect {
    int left = 0;
    int top = 0;
    int width = 0;
    int height = 0;
};

/// Rectangle crop_portrait would cut, in source pixel indices.
CropRect portrait_rect(const Landmarks& landmarks, const PortraitGeometry& geometry);

ImagePlane crop_portrait(const ImagePlane& source, const Landmarks& landmarks,
                         const PortraitGeometry& geometry = {});

}  // namespace fcb
