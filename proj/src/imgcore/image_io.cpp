#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <cctype>

#include "fcb/error.hpp"
#include "fcb/imgcore.hpp"
#include "fcb/text.hpp"

namespace fcb {

ImagePlane::ImagePlane(int width, int height, std::uint8_t fill)
    : width_(width), height_(height),
      samples_(static_cast<std::size_t>(width) * height * kChannels, fill) {
    if (width < 1 || height < 1) throw Error("image dimensions must be >= 1");
}

ImagePlane::ImagePlane(int width, int height, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
    if (width < 1 || height < 1) throw Error("image dimensions must be >= 1");
    if (samples_.size() != static_cast<std::size_t>(width) * height * kChannels) {
        throw Error("sample count does not match " + std::to_string(width) + "x" +
                    std::to_string(height) + "x3");
    }
}

void ImagePlane::set_pixel(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const auto i = index(x, y, 0);
    samples_[i] = r;
    samples_[i + 1] = g;
    samples_[i + 2] = b;
}

namespace {

struct PngReadState {
    std::span<const std::uint8_t> bytes;
    std::size_t offset = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t n) {
    auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (st->offset + n > st->bytes.size()) png_error(png, "truncated PNG stream");
    std::memcpy(out, st->bytes.data() + st->offset, n);
    st->offset += n;
}

struct PngErrorSink {
    char message[256] = "unknown error";
};

void png_error_longjmp(png_structp png, png_const_charp msg) {
    auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
    std::snprintf(sink->message, sizeof sink->message, "%s", msg);
    png_longjmp(png, 1);
}

void png_warning_ignore(png_structp, png_const_charp) {}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t n) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + n);
}

void png_flush_noop(png_structp) {}

// Binary PPM (P6) / PGM (P5), maxval <= 255.
ImagePlane decode_pnm(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 2;
    auto next_token = [&]() -> long long {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        long long v = 0;
        bool any = false;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos++] - '0');
            any = true;
            if (v > (1 << 24)) throw DecodeError("pnm: header value too large");
        }
        if (!any) throw DecodeError("pnm: malformed header");
        return v;
    };
    const bool color = bytes[1] == '6';
    const auto w = next_token();
    const auto h = next_token();
    const auto maxval = next_token();
    if (w < 1 || h < 1 || maxval < 1 || maxval > 255) throw DecodeError("pnm: unsupported header");
    ++pos;
    const auto channels = color ? 3 : 1;
    const auto need = static_cast<std::size_t>(w * h * channels);
    if (pos + need > bytes.size()) throw DecodeError("pnm: truncated data");
    ImagePlane img(static_cast<int>(w), static_cast<int>(h));
    for (std::size_t i = 0; i < static_cast<std::size_t>(w * h); ++i) {
        for (int c = 0; c < 3; ++c) {
            const auto v = bytes[pos + i * channels + (color ? c : 0)];
            img.samples()[i * 3 + c] = static_cast<std::uint8_t>(v * 255 / maxval);
        }
    }
    return img;
}

}  // namespace

ImagePlane decode_png(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        throw DecodeError("png: bad signature");
    }
    PngErrorSink sink;
    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, png_error_longjmp, png_warning_ignore);
    if (!png) throw DecodeError("png: out of memory");
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp* p;
        png_infop* i;
        ~Guard() { png_destroy_read_struct(p, i, nullptr); }
    } guard{&png, &info};

    // Everything libpng can fail on happens below; the jump lands here with
    // only trivially destructible state created since.
    ImagePlane img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        throw DecodeError(std::string("png: ") + sink.message);
    }

    PngReadState st{bytes, 0};
    png_set_read_fn(png, &st, png_read_from_span);
    png_read_info(png, info);

    const auto w = png_get_image_width(png, info);
    const auto h = png_get_image_height(png, info);
    const auto color_type = png_get_color_type(png, info);
    const auto depth = png_get_bit_depth(png, info);
    if (w < 1 || h < 1 || w > (1u << 16) || h > (1u << 16)) png_error(png, "bad dimensions");

    if (depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    png_set_strip_alpha(png);
    png_read_update_info(png, info);
    if (png_get_rowbytes(png, info) != w * 3) png_error(png, "unexpected row layout");

    img = ImagePlane(static_cast<int>(w), static_cast<int>(h));
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = img.samples().data() + static_cast<std::size_t>(y) * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    return img;
}

ImagePlane read_image(const std::filesystem::path& file) {
    const auto bytes = text::read_bytes(file);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
        return decode_pnm(bytes);
    }
    try {
        return decode_png(bytes);
    } catch (const DecodeError& e) {
        throw DecodeError(file.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_png(const ImagePlane& image, int zlib_level) {
    std::vector<std::uint8_t> out;
    PngErrorSink sink;
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, png_error_longjmp, png_warning_ignore);
    if (!png) throw CodecError("png: out of memory");
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp* p;
        png_infop* i;
        ~Guard() { png_destroy_write_struct(p, i); }
    } guard{&png, &info};

    if (setjmp(png_jmpbuf(png))) {
        throw CodecError(std::string("png: ") + sink.message);
    }
    {
        png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
        png_set_compression_level(png, zlib_level);
        png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_ALL_FILTERS);
        png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
                     static_cast<png_uint_32>(image.height()), 8, PNG_COLOR_TYPE_RGB,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_BASE, PNG_FILTER_TYPE_BASE);
        png_write_info(png, info);
        const auto stride = static_cast<std::size_t>(image.width()) * 3;
        for (int y = 0; y < image.height(); ++y) {
            png_write_row(png, image.samples().data() + y * stride);
        }
        png_write_end(png, nullptr);
    }
    return out;
}

void write_png(const ImagePlane& image, const std::filesystem::path& file, int zlib_level) {
    text::write_bytes(file, encode_png(image, zlib_level));
}

}  // namespace fcb
