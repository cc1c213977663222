#include <csetjmp>
#include <cstdio>
#include <cstdlib>
// jpeglib.h needs size_t and FILE declared first.
#include <jpeglib.h>

#include "adapters.hpp"
#include "fcb/error.hpp"

#define FCB_STR2(x) #x
#define FCB_STR(x) FCB_STR2(x)

namespace fcb::detail {

namespace {

struct JpegError {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_longjmp(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegError*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

class JpegAdapter final : public CodecAdapter {
public:
    CodecId id() const override { return CodecId::jpeg; }

    std::vector<std::uint8_t> encode(const ImagePlane& image, const CodecParam& param) const override {
        jpeg_compress_struct cinfo{};
        JpegError err{};
        cinfo.err = jpeg_std_error(&err.mgr);
        err.mgr.error_exit = jpeg_error_longjmp;

        unsigned char* buffer = nullptr;
        unsigned long size = 0;
        if (setjmp(err.jump)) {
            jpeg_destroy_compress(&cinfo);
            std::free(buffer);
            throw CodecError(std::string("jpeg encode: ") + err.message);
        }
        jpeg_create_compress(&cinfo);
        jpeg_mem_dest(&cinfo, &buffer, &size);
        cinfo.image_width = static_cast<JDIMENSION>(image.width());
        cinfo.image_height = static_cast<JDIMENSION>(image.height());
        cinfo.input_components = 3;
        cinfo.in_color_space = JCS_RGB;
        jpeg_set_defaults(&cinfo);
        jpeg_set_quality(&cinfo, static_cast<int>(param.value), TRUE);
        jpeg_start_compress(&cinfo, TRUE);
        const auto stride = static_cast<std::size_t>(image.width()) * 3;
        while (cinfo.next_scanline < cinfo.image_height) {
            auto* row = const_cast<JSAMPLE*>(image.samples().data() + cinfo.next_scanline * stride);
            jpeg_write_scanlines(&cinfo, &row, 1);
        }
        jpeg_finish_compress(&cinfo);
        jpeg_destroy_compress(&cinfo);

        std::vector<std::uint8_t> out(buffer, buffer + size);
        std::free(buffer);
        return out;
    }

    ImagePlane decode(std::span<const std::uint8_t> payload) const override {
        jpeg_decompress_struct cinfo{};
        JpegError err{};
        cinfo.err = jpeg_std_error(&err.mgr);
        err.mgr.error_exit = jpeg_error_longjmp;
        ImagePlane img;
        if (setjmp(err.jump)) {
            jpeg_destroy_decompress(&cinfo);
            throw DecodeError(std::string("jpeg decode: ") + err.message);
        }
        jpeg_create_decompress(&cinfo);
        jpeg_mem_src(&cinfo, payload.data(), static_cast<unsigned long>(payload.size()));
        if (jpeg_read_header(&cinfo, TRUE) != JPEG_HEADER_OK) {
            jpeg_destroy_decompress(&cinfo);
            throw DecodeError("jpeg decode: no image header");
        }
        cinfo.out_color_space = JCS_RGB;
        jpeg_start_decompress(&cinfo);
        img = ImagePlane(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height));
        const auto stride = static_cast<std::size_t>(img.width()) * 3;
        while (cinfo.output_scanline < cinfo.output_height) {
            JSAMPROW row = img.samples().data() + cinfo.output_scanline * stride;
            jpeg_read_scanlines(&cinfo, &row, 1);
        }
        jpeg_finish_decompress(&cinfo);
        jpeg_destroy_decompress(&cinfo);
        return img;
    }

    std::string version() const override {
#ifdef LIBJPEG_TURBO_VERSION
        return "libjpeg-turbo " FCB_STR(LIBJPEG_TURBO_VERSION);
#else
        return "libjpeg " + std::to_string(JPEG_LIB_VERSION);
#endif
    }
};

}  // namespace

const CodecAdapter& jpeg_adapter() {
    static const JpegAdapter instance;
    return instance;
}

}  // namespace fcb::detail
