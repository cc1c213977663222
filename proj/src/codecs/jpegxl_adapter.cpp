#include <jxl/decode.h>
#include <jxl/encode.h>

#include <memory>

#include "adapters.hpp"
#include "fcb/error.hpp"

namespace fcb::detail {

namespace {

struct EncoderDeleter {
    void operator()(JxlEncoder* e) const { JxlEncoderDestroy(e); }
};
struct DecoderDeleter {
    void operator()(JxlDecoder* d) const { JxlDecoderDestroy(d); }
};

// Encoder defaults (effort 7, bare codestream, no parallel runner so output
// is schedule-independent); only the butteraugli distance is set.
class JpegXlAdapter final : public CodecAdapter {
public:
    CodecId id() const override { return CodecId::jpegxl; }

    std::vector<std::uint8_t> encode(const ImagePlane& image, const CodecParam& param) const override {
        const auto fail = [&](const char* what) {
            return CodecError(std::string("jpegxl: ") + what + " at distance " + param.to_string());
        };
        std::unique_ptr<JxlEncoder, EncoderDeleter> enc(JxlEncoderCreate(nullptr));
        if (!enc) throw fail("cannot create encoder");

        JxlBasicInfo info;
        JxlEncoderInitBasicInfo(&info);
        info.xsize = static_cast<uint32_t>(image.width());
        info.ysize = static_cast<uint32_t>(image.height());
        info.bits_per_sample = 8;
        info.num_color_channels = 3;
        info.uses_original_profile = JXL_FALSE;
        if (JxlEncoderSetBasicInfo(enc.get(), &info) != JXL_ENC_SUCCESS) throw fail("basic info rejected");

        JxlColorEncoding color;
        JxlColorEncodingSetToSRGB(&color, JXL_FALSE);
        if (JxlEncoderSetColorEncoding(enc.get(), &color) != JXL_ENC_SUCCESS) throw fail("color encoding rejected");

        JxlEncoderFrameSettings* settings = JxlEncoderFrameSettingsCreate(enc.get(), nullptr);
        if (JxlEncoderSetFrameDistance(settings, static_cast<float>(param.value)) != JXL_ENC_SUCCESS) {
            throw fail("distance rejected");
        }
        const JxlPixelFormat format{3, JXL_TYPE_UINT8, JXL_NATIVE_ENDIAN, 0};
        const auto samples = image.samples();
        if (JxlEncoderAddImageFrame(settings, &format, samples.data(), samples.size()) != JXL_ENC_SUCCESS) {
            throw fail("frame rejected");
        }
        JxlEncoderCloseInput(enc.get());

        std::vector<std::uint8_t> out(4096);
        std::uint8_t* next = out.data();
        std::size_t avail = out.size();
        while (true) {
            const auto status = JxlEncoderProcessOutput(enc.get(), &next, &avail);
            if (status == JXL_ENC_SUCCESS) break;
            if (status != JXL_ENC_NEED_MORE_OUTPUT) throw fail("encode failed");
            const auto used = static_cast<std::size_t>(next - out.data());
            out.resize(out.size() * 2);
            next = out.data() + used;
            avail = out.size() - used;
        }
        out.resize(static_cast<std::size_t>(next - out.data()));
        return out;
    }

    ImagePlane decode(std::span<const std::uint8_t> payload) const override {
        std::unique_ptr<JxlDecoder, DecoderDeleter> dec(JxlDecoderCreate(nullptr));
        if (!dec) throw DecodeError("jpegxl: cannot create decoder");
        if (JxlDecoderSubscribeEvents(dec.get(), JXL_DEC_BASIC_INFO | JXL_DEC_FULL_IMAGE) !=
            JXL_DEC_SUCCESS) {
            throw DecodeError("jpegxl: subscribe failed");
        }
        JxlDecoderSetInput(dec.get(), payload.data(), payload.size());
        JxlDecoderCloseInput(dec.get());

        const JxlPixelFormat format{3, JXL_TYPE_UINT8, JXL_NATIVE_ENDIAN, 0};
        ImagePlane img;
        bool have_image = false;
        while (true) {
            const auto status = JxlDecoderProcessInput(dec.get());
            if (status == JXL_DEC_ERROR || status == JXL_DEC_NEED_MORE_INPUT) {
                throw DecodeError("jpegxl: corrupt or truncated stream");
            }
            if (status == JXL_DEC_BASIC_INFO) {
                JxlBasicInfo info;
                if (JxlDecoderGetBasicInfo(dec.get(), &info) != JXL_DEC_SUCCESS) {
                    throw DecodeError("jpegxl: bad basic info");
                }
                if (info.xsize < 1 || info.ysize < 1 || info.xsize > (1u << 16) || info.ysize > (1u << 16)) {
                    throw DecodeError("jpegxl: unsupported dimensions");
                }
                img = ImagePlane(static_cast<int>(info.xsize), static_cast<int>(info.ysize));
            } else if (status == JXL_DEC_NEED_IMAGE_OUT_BUFFER) {
                if (img.empty()) throw DecodeError("jpegxl: image before header");
                std::size_t needed = 0;
                if (JxlDecoderImageOutBufferSize(dec.get(), &format, &needed) != JXL_DEC_SUCCESS ||
                    needed != img.samples().size()) {
                    throw DecodeError("jpegxl: unexpected output buffer size");
                }
                if (JxlDecoderSetImageOutBuffer(dec.get(), &format, img.samples().data(), needed) !=
                    JXL_DEC_SUCCESS) {
                    throw DecodeError("jpegxl: cannot set output buffer");
                }
            } else if (status == JXL_DEC_FULL_IMAGE) {
                have_image = true;
            } else if (status == JXL_DEC_SUCCESS) {
                break;
            }
        }
        if (!have_image) throw DecodeError("jpegxl: no frame decoded");
        return img;
    }

    std::string version() const override {
        const auto v = JxlEncoderVersion();
        return "libjxl " + std::to_string(v / 1000000) + "." + std::to_string(v / 1000 % 1000) + "." +
               std::to_string(v % 1000);
    }
};

}  // namespace

const CodecAdapter& jpegxl_adapter() {
    static const JpegXlAdapter instance;
    return instance;
}

}  // namespace fcb::detail
