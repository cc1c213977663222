#include <cmath>

#include "fcb/codecs.hpp"
#include "fcb/error.hpp"
#include "fcb/text.hpp"

namespace fcb {

namespace {

// jpeg2000 ratio grid: 1.02^k for k = 0..kJp2Steps, plus the 2000 cap.
constexpr double kJp2Step = 1.02;
constexpr double kJp2MaxRatio = 2000.0;
const int kJp2Steps = static_cast<int>(std::floor(std::log(kJp2MaxRatio) / std::log(kJp2Step)));

constexpr int kJxlMinCenti = 10;
constexpr int kJxlMaxCenti = 2500;

}  // namespace

std::string to_string(CodecId id) {
    switch (id) {
        case CodecId::png_resized: return "png_resized";
        case CodecId::jpeg: return "jpeg";
        case CodecId::jpeg2000: return "jpeg2000";
        case CodecId::jpegxl: return "jpegxl";
    }
    return "?";
}

CodecId parse_codec(const std::string& name) {
    for (auto id : kAllCodecs) {
        if (to_string(id) == name) return id;
    }
    throw ConfigError("unknown codec '" + name + "' (expected png_resized, jpeg, jpeg2000, jpegxl)");
}

std::string codec_extension(CodecId id) {
    switch (id) {
        case CodecId::png_resized: return "png";
        case CodecId::jpeg: return "jpg";
        case CodecId::jpeg2000: return "jp2";
        case CodecId::jpegxl: return "jxl";
    }
    return "bin";
}

std::string codec_label(CodecId id) {
    switch (id) {
        case CodecId::png_resized: return "PNG-resized";
        case CodecId::jpeg: return "JPEG";
        case CodecId::jpeg2000: return "JPEG 2000";
        case CodecId::jpegxl: return "JPEG XL";
    }
    return "?";
}

std::string CodecParam::to_string() const {
    switch (codec) {
        case CodecId::jpeg: return std::to_string(static_cast<int>(value));
        case CodecId::jpegxl: return text::format_fixed(value, 2);
        default: return text::format_double(value);
    }
}

bool param_in_range(const CodecParam& p) {
    if (!std::isfinite(p.value)) return false;
    switch (p.codec) {
        case CodecId::jpeg: return p.value >= 1 && p.value <= 100 && p.value == std::floor(p.value);
        case CodecId::jpegxl: return p.value >= 0.1 - 1e-12 && p.value <= 25.0 + 1e-12;
        case CodecId::jpeg2000: return p.value >= 1.0 && p.value <= kJp2MaxRatio;
        case CodecId::png_resized: return p.value > 0.0 && p.value <= 1.0;
    }
    return false;
}

ParamGrid::ParamGrid(CodecId codec, int source_width) : codec_(codec), source_width_(source_width) {
    switch (codec) {
        case CodecId::jpeg: size_ = 100; break;
        case CodecId::jpegxl: size_ = kJxlMaxCenti - kJxlMinCenti + 1; break;
        case CodecId::jpeg2000: size_ = kJp2Steps + 2; break;
        case CodecId::png_resized:
            if (source_width < 1) throw CodecError("png_resized grid needs a source width");
            size_ = source_width;
            break;
    }
}

CodecParam ParamGrid::at(int index) const {
    if (index < 0 || index >= size_) throw CodecError("grid index out of range");
    switch (codec_) {
        case CodecId::jpeg: return {codec_, static_cast<double>(index + 1)};
        case CodecId::jpegxl: return {codec_, (kJxlMaxCenti - index) / 100.0};
        case CodecId::jpeg2000:
            if (index == 0) return {codec_, kJp2MaxRatio};
            return {codec_, std::pow(kJp2Step, size_ - 1 - index)};
        case CodecId::png_resized:
            return {codec_, static_cast<double>(index + 1) / source_width_};
    }
    return {};
}

std::string ParamGrid::descriptor() const {
    switch (codec_) {
        case CodecId::jpeg: return "jpeg:q1-100";
        case CodecId::jpegxl: return "jpegxl:d25.00-0.10/0.01";
        case CodecId::jpeg2000: return "jpeg2000:r2000,1.02^" + std::to_string(kJp2Steps) + "-1";
        case CodecId::png_resized: return "png_resized:w1-" + std::to_string(source_width_);
    }
    return "?";
}

ParamGrid grid_for(CodecId codec, const ImagePlane& image) {
    return ParamGrid(codec, image.width());
}

ByteBudget ByteBudget::from_kb(double kb) {
    return {text::round_half_away(kb * 1000.0)};
}

std::pair<int, int> png_resized_dims(int width, int height, double scale) {
    const auto w = text::round_half_away(scale * width);
    const auto h = text::round_half_away(scale * height);
    return {static_cast<int>(std::max<long long>(w, 1)), static_cast<int>(std::max<long long>(h, 1))};
}

std::vector<ByteBudget> roi_ladder() {
    return {{5000}, {4500}, {4000}, {3500}, {3000}, {2500}, {2200}};
}

std::vector<ByteBudget> extended_roi_ladder() {
    return {{27000}, {22000}, {17000}, {12000}, {10000}};
}

std::vector<ByteBudget> portrait_ladder() {
    return {{30000}, {24000}, {18000}, {12000}, {10000}, {9000}, {8000}, {7700}};
}

}  // namespace fcb
