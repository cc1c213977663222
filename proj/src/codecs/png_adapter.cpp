#include <png.h>
#include <zlib.h>

#include "adapters.hpp"
#include "fcb/error.hpp"

namespace fcb::detail {

namespace {

// Downscale with the shared bilinear resampler, then store losslessly.
class PngResizedAdapter final : public CodecAdapter {
public:
    CodecId id() const override { return CodecId::png_resized; }

    std::vector<std::uint8_t> encode(const ImagePlane& image, const CodecParam& param) const override {
        const auto [w, h] = png_resized_dims(image.width(), image.height(), param.value);
        return encode_png(bilinear_resize(image, w, h));
    }

    ImagePlane decode(std::span<const std::uint8_t> payload) const override {
        return decode_png(payload);
    }

    std::string version() const override {
        return std::string("libpng ") + png_get_libpng_ver(nullptr) + " / zlib " + zlibVersion();
    }
};

}  // namespace

const CodecAdapter& png_resized_adapter() {
    static const PngResizedAdapter instance;
    return instance;
}

}  // namespace fcb::detail
