#pragma once

#include "fcb/codecs.hpp"

namespace fcb::detail {

const CodecAdapter& png_resized_adapter();
const CodecAdapter& jpeg_adapter();
const CodecAdapter& jpeg2000_adapter();
const CodecAdapter& jpegxl_adapter();

}  // namespace fcb::detail
