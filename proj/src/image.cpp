#include "wgfd/image.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

#include <jpeglib.h>
#include <png.h>

#include "wgfd/error.hpp"

namespace wgfd {

namespace {

bool is_png(std::span<const std::uint8_t> b) {
    static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    return b.size() >= 8 && std::equal(sig, sig + 8, b.begin());
}

bool is_jpeg(std::span<const std::uint8_t> b) {
    return b.size() >= 3 && b[0] == 0xff && b[1] == 0xd8 && b[2] == 0xff;
}

ImageTensor from_bytes(const std::uint8_t* px, std::size_t h, std::size_t w, std::size_t src_channels) {
    ImageTensor img(h, w, 3);
    for (std::size_t i = 0; i < h * w; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            const std::uint8_t v = src_channels == 1 ? px[i] : px[i * src_channels + c];
            img.data[i * 3 + c] = static_cast<double>(v) / 255.0;
        }
    }
    return img;
}

ImageTensor decode_png(std::span<const std::uint8_t> bytes) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw DecodeError(std::string("PNG decode failed: ") + image.message);
    }
    const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
    image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw DecodeError("PNG decode failed: " + msg);
    }
    return from_bytes(buffer.data(), image.height, image.width, gray ? 1 : 3);
}

struct JpegErrorManager {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

void jpeg_silent(j_common_ptr) {}

ImageTensor decode_jpeg(std::span<const std::uint8_t> bytes) {
    jpeg_decompress_struct cinfo;
    JpegErrorManager err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;
    err.pub.output_message = jpeg_silent;
    err.message[0] = '\0';

    // Everything the longjmp may skip over lives outside this frame.
    const auto pixels = std::make_unique<std::vector<std::uint8_t>>();
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw DecodeError(std::string("JPEG decode failed: ") + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    if (cinfo.jpeg_color_space != JCS_GRAYSCALE) cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    const std::size_t w = cinfo.output_width;
    const std::size_t h = cinfo.output_height;
    const std::size_t ch = static_cast<std::size_t>(cinfo.output_components);
    pixels->resize(w * h * ch);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = pixels->data() + static_cast<std::size_t>(cinfo.output_scanline) * w * ch;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    // libjpeg reports truncated or corrupt entropy data as warnings and pads
    // the output; those images are rejected.
    const long warnings = err.pub.num_warnings;
    jpeg_destroy_decompress(&cinfo);
    if (warnings > 0) throw DecodeError("JPEG decode failed: corrupt or truncated data");
    if (ch != 1 && ch != 3) throw DecodeError("JPEG decode failed: unsupported component count");
    return from_bytes(pixels->data(), h, w, ch);
}

} // namespace

void validate(const ImageTensor& img) {
    if (img.channels != 1 && img.channels != 3) {
        throw InvalidArgument("image must have 1 or 3 channels, got " + std::to_string(img.channels));
    }
    if (img.height == 0 || img.width == 0 || img.data.size() != img.height * img.width * img.channels) {
        throw InvalidArgument("image data length does not match its shape");
    }
    for (double v : img.data) {
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("image value outside [0,1]");
    }
}

Plane extract_channel(const ImageTensor& img, std::size_t channel) {
    Plane p(img.height, img.width);
    for (std::size_t i = 0; i < img.height * img.width; ++i) p.data[i] = img.data[i * img.channels + channel];
    return p;
}

void insert_channel(ImageTensor& img, std::size_t channel, const Plane& plane) {
    for (std::size_t i = 0; i < img.height * img.width; ++i) img.data[i * img.channels + channel] = plane.data[i];
}

ImageTensor to_rgb(const ImageTensor& img) {
    if (img.channels == 3) return img;
    ImageTensor out(img.height, img.width, 3);
    for (std::size_t i = 0; i < img.height * img.width; ++i) {
        for (std::size_t c = 0; c < 3; ++c) out.data[i * 3 + c] = img.data[i];
    }
    return out;
}

ImageTensor resize_bilinear(const ImageTensor& img, std::size_t out_h, std::size_t out_w) {
    if (out_h == 0 || out_w == 0) {
        throw InvalidArgument("resize target has a zero dimension: " + std::to_string(out_h) + "x" +
                              std::to_string(out_w));
    }
    if (img.height == 0 || img.width == 0) throw InvalidArgument("cannot resize an empty image");

    struct Tap {
        std::size_t i0, i1;
        double t;
    };
    auto taps = [](std::size_t in, std::size_t out) {
        std::vector<Tap> v(out);
        const double scale = static_cast<double>(in) / static_cast<double>(out);
        for (std::size_t o = 0; o < out; ++o) {
            double s = (static_cast<double>(o) + 0.5) * scale - 0.5;
            s = std::clamp(s, 0.0, static_cast<double>(in - 1));
            const auto i0 = static_cast<std::size_t>(std::floor(s));
            const std::size_t i1 = std::min(i0 + 1, in - 1);
            v[o] = {i0, i1, s - static_cast<double>(i0)};
        }
        return v;
    };
    const auto ty = taps(img.height, out_h);
    const auto tx = taps(img.width, out_w);

    ImageTensor out(out_h, out_w, img.channels);
    for (std::size_t y = 0; y < out_h; ++y) {
        const auto& a = ty[y];
        for (std::size_t x = 0; x < out_w; ++x) {
            const auto& b = tx[x];
            for (std::size_t c = 0; c < img.channels; ++c) {
                const double top = img.at(a.i0, b.i0, c) * (1.0 - b.t) + img.at(a.i0, b.i1, c) * b.t;
                const double bot = img.at(a.i1, b.i0, c) * (1.0 - b.t) + img.at(a.i1, b.i1, c) * b.t;
                out.at(y, x, c) = std::clamp(top * (1.0 - a.t) + bot * a.t, 0.0, 1.0);
            }
        }
    }
    return out;
}

ImageTensor decode_image(std::span<const std::uint8_t> bytes) {
    if (is_png(bytes)) return decode_png(bytes);
    if (is_jpeg(bytes)) return decode_jpeg(bytes);
    if (bytes.empty()) throw DecodeError("decode failed: empty input");
    throw DecodeError("decode failed: not a PNG or JPEG stream (unrecognized signature)");
}

ImageTensor read_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return decode_image(bytes);
    } catch (const DecodeError& e) {
        throw DecodeError(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_png(const ImageTensor& img) {
    if (img.channels != 1 && img.channels != 3) throw InvalidArgument("PNG output needs 1 or 3 channels");
    std::vector<std::uint8_t> px(img.data.size());
    for (std::size_t i = 0; i < px.size(); ++i) {
        px[i] = static_cast<std::uint8_t>(std::lround(std::clamp(img.data[i], 0.0, 1.0) * 255.0));
    }
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, px.data(), 0, nullptr)) {
        throw Error(std::string("PNG encode failed: ") + image.message, false);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, px.data(), 0, nullptr)) {
        throw Error(std::string("PNG encode failed: ") + image.message, false);
    }
    out.resize(size);
    return out;
}

void write_png(const std::filesystem::path& path, const ImageTensor& img) { write_file(path, encode_png(img)); }

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

} // namespace wgfd
