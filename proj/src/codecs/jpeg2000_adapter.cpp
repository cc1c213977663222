#include <openjpeg.h>

#include <algorithm>
#include <cstring>
#include <memory>

#include "adapters.hpp"
#include "fcb/error.hpp"

namespace fcb::detail {

namespace {

struct MemoryStream {
    std::vector<std::uint8_t> bytes;
    std::size_t offset = 0;
};

OPJ_SIZE_T stream_write(void* buffer, OPJ_SIZE_T n, void* user) {
    auto* s = static_cast<MemoryStream*>(user);
    if (s->offset + n > s->bytes.size()) s->bytes.resize(s->offset + n);
    std::memcpy(s->bytes.data() + s->offset, buffer, n);
    s->offset += n;
    return n;
}

OPJ_SIZE_T stream_read(void* buffer, OPJ_SIZE_T n, void* user) {
    auto* s = static_cast<MemoryStream*>(user);
    if (s->offset >= s->bytes.size()) return static_cast<OPJ_SIZE_T>(-1);
    n = std::min<OPJ_SIZE_T>(n, s->bytes.size() - s->offset);
    std::memcpy(buffer, s->bytes.data() + s->offset, n);
    s->offset += n;
    return n;
}

OPJ_OFF_T stream_skip(OPJ_OFF_T n, void* user) {
    auto* s = static_cast<MemoryStream*>(user);
    const auto target = static_cast<OPJ_OFF_T>(s->offset) + n;
    if (target < 0) return -1;
    s->offset = static_cast<std::size_t>(target);
    return n;
}

OPJ_BOOL stream_seek(OPJ_OFF_T pos, void* user) {
    auto* s = static_cast<MemoryStream*>(user);
    if (pos < 0) return OPJ_FALSE;
    s->offset = static_cast<std::size_t>(pos);
    return OPJ_TRUE;
}

void quiet(const char*, void*) {}

struct CodecDeleter {
    void operator()(opj_codec_t* c) const { opj_destroy_codec(c); }
};
struct StreamDeleter {
    void operator()(opj_stream_t* s) const { opj_stream_destroy(s); }
};
struct ImageDeleter {
    void operator()(opj_image_t* i) const { opj_image_destroy(i); }
};

std::unique_ptr<opj_stream_t, StreamDeleter> make_stream(MemoryStream& mem, bool input) {
    std::unique_ptr<opj_stream_t, StreamDeleter> stream(
        opj_stream_create(OPJ_J2K_STREAM_CHUNK_SIZE, input ? OPJ_TRUE : OPJ_FALSE));
    if (!stream) throw CodecError("jpeg2000: cannot create stream");
    opj_stream_set_user_data(stream.get(), &mem, nullptr);
    if (input) {
        opj_stream_set_user_data_length(stream.get(), mem.bytes.size());
        opj_stream_set_read_function(stream.get(), stream_read);
    } else {
        opj_stream_set_write_function(stream.get(), stream_write);
    }
    opj_stream_set_skip_function(stream.get(), stream_skip);
    opj_stream_set_seek_function(stream.get(), stream_seek);
    return stream;
}

// Library defaults throughout (reversible 5/3 wavelet, 64x64 code blocks, no
// MCT, LRCP, one layer) except the single rate-controlled layer.
class Jpeg2000Adapter final : public CodecAdapter {
public:
    CodecId id() const override { return CodecId::jpeg2000; }

    std::vector<std::uint8_t> encode(const ImagePlane& image, const CodecParam& param) const override {
        opj_cparameters_t params;
        opj_set_default_encoder_parameters(&params);
        params.tcp_numlayers = 1;
        params.cp_disto_alloc = 1;
        // A rate of 1 (or less) asks for a lossless layer.
        params.tcp_rates[0] = param.value <= 1.0 ? 0.0f : static_cast<float>(param.value);
        const int min_side = std::min(image.width(), image.height());
        while (params.numresolution > 1 && (1 << (params.numresolution - 1)) > min_side) {
            --params.numresolution;
        }

        opj_image_cmptparm_t comp[3];
        std::memset(comp, 0, sizeof comp);
        for (auto& c : comp) {
            c.dx = 1;
            c.dy = 1;
            c.w = static_cast<OPJ_UINT32>(image.width());
            c.h = static_cast<OPJ_UINT32>(image.height());
            c.prec = 8;
            c.sgnd = 0;
        }
        std::unique_ptr<opj_image_t, ImageDeleter> img(opj_image_create(3, comp, OPJ_CLRSPC_SRGB));
        if (!img) throw CodecError("jpeg2000: cannot allocate image");
        img->x0 = 0;
        img->y0 = 0;
        img->x1 = static_cast<OPJ_UINT32>(image.width());
        img->y1 = static_cast<OPJ_UINT32>(image.height());
        const auto px = static_cast<std::size_t>(image.width()) * image.height();
        const auto samples = image.samples();
        for (std::size_t i = 0; i < px; ++i) {
            for (int c = 0; c < 3; ++c) img->comps[c].data[i] = samples[i * 3 + c];
        }

        std::unique_ptr<opj_codec_t, CodecDeleter> codec(opj_create_compress(OPJ_CODEC_JP2));
        opj_set_info_handler(codec.get(), quiet, nullptr);
        opj_set_warning_handler(codec.get(), quiet, nullptr);
        opj_set_error_handler(codec.get(), quiet, nullptr);
        if (!opj_setup_encoder(codec.get(), &params, img.get())) {
            throw CodecError("jpeg2000: encoder setup failed for ratio " + param.to_string());
        }
        MemoryStream mem;
        auto stream = make_stream(mem, false);
        if (!opj_start_compress(codec.get(), img.get(), stream.get()) ||
            !opj_encode(codec.get(), stream.get()) || !opj_end_compress(codec.get(), stream.get())) {
            throw CodecError("jpeg2000: encode failed for ratio " + param.to_string());
        }
        stream.reset();
        return std::move(mem.bytes);
    }

    ImagePlane decode(std::span<const std::uint8_t> payload) const override {
        MemoryStream mem{{payload.begin(), payload.end()}, 0};
        const bool jp2 = payload.size() >= 12 && payload[4] == 'j' && payload[5] == 'P';
        std::unique_ptr<opj_codec_t, CodecDeleter> codec(
            opj_create_decompress(jp2 ? OPJ_CODEC_JP2 : OPJ_CODEC_J2K));
        opj_set_info_handler(codec.get(), quiet, nullptr);
        opj_set_warning_handler(codec.get(), quiet, nullptr);
        opj_set_error_handler(codec.get(), quiet, nullptr);
        opj_dparameters_t params;
        opj_set_default_decoder_parameters(&params);
        if (!opj_setup_decoder(codec.get(), &params)) throw DecodeError("jpeg2000: decoder setup failed");
        auto stream = make_stream(mem, true);
        opj_image_t* raw = nullptr;
        if (!opj_read_header(stream.get(), codec.get(), &raw)) {
            if (raw) opj_image_destroy(raw);
            throw DecodeError("jpeg2000: bad header");
        }
        std::unique_ptr<opj_image_t, ImageDeleter> img(raw);
        if (!opj_decode(codec.get(), stream.get(), img.get()) ||
            !opj_end_decompress(codec.get(), stream.get())) {
            throw DecodeError("jpeg2000: decode failed");
        }
        if (img->numcomps < 1) throw DecodeError("jpeg2000: no components");
        const auto& c0 = img->comps[0];
        const int w = static_cast<int>(c0.w);
        const int h = static_cast<int>(c0.h);
        if (w < 1 || h < 1) throw DecodeError("jpeg2000: empty image");
        for (OPJ_UINT32 c = 0; c < img->numcomps; ++c) {
            if (img->comps[c].w != c0.w || img->comps[c].h != c0.h || img->comps[c].prec > 8) {
                throw DecodeError("jpeg2000: unsupported component layout");
            }
        }
        ImagePlane out(w, h);
        const auto px = static_cast<std::size_t>(w) * h;
        for (std::size_t i = 0; i < px; ++i) {
            for (int c = 0; c < 3; ++c) {
                const auto& comp = img->comps[img->numcomps >= 3 ? c : 0];
                out.samples()[i * 3 + c] = static_cast<std::uint8_t>(std::clamp(comp.data[i], 0, 255));
            }
        }
        return out;
    }

    std::string version() const override { return std::string("openjpeg ") + opj_version(); }
};

}  // namespace

const CodecAdapter& jpeg2000_adapter() {
    static const Jpeg2000Adapter instance;
    return instance;
}

}  // namespace fcb::detail
