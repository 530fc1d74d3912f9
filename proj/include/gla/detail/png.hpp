#pragma once

// Tiny PNG writer (8-bit gray / RGB, filter 0, one zlib stream). Enough for
// frame previews and report figures; nothing here reads PNGs back.

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gla/common.hpp"

namespace gla::detail {

inline void png_put_be32(std::vector<unsigned char>& out, uint32_t v) {
    out.push_back(static_cast<unsigned char>(v >> 24));
    out.push_back(static_cast<unsigned char>(v >> 16));
    out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v));
}

inline void png_chunk(std::vector<unsigned char>& out, const char type[4],
                      const unsigned char* data, size_t n) {
    png_put_be32(out, static_cast<uint32_t>(n));
    size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data, data + n);
    uint32_t crc = static_cast<uint32_t>(
        crc32(0, out.data() + start, static_cast<uInt>(out.size() - start)));
    png_put_be32(out, crc);
}

// channels: 1 = grayscale, 3 = RGB. pixels: row-major, `channels` bytes per pixel.
inline std::vector<unsigned char> png_encode(int width, int height, int channels,
                                             const std::vector<unsigned char>& pixels) {
    if (channels != 1 && channels != 3) throw StructuralError("png: channels must be 1 or 3");
    if (pixels.size() != static_cast<size_t>(width) * height * channels)
        throw StructuralError("png: pixel buffer size mismatch");

    // filter byte 0 per scanline
    std::vector<unsigned char> raw;
    raw.reserve(pixels.size() + static_cast<size_t>(height));
    const size_t stride = static_cast<size_t>(width) * channels;
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);
        raw.insert(raw.end(), pixels.begin() + y * stride, pixels.begin() + (y + 1) * stride);
    }

    uLongf zcap = compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> z(zcap);
    if (compress2(z.data(), &zcap, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw IoError("png: zlib compression failed");
    z.resize(zcap);

    std::vector<unsigned char> out;
    static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    out.insert(out.end(), sig, sig + 8);

    unsigned char ihdr[13];
    ihdr[0] = static_cast<unsigned char>(width >> 24);
    ihdr[1] = static_cast<unsigned char>(width >> 16);
    ihdr[2] = static_cast<unsigned char>(width >> 8);
    ihdr[3] = static_cast<unsigned char>(width);
    ihdr[4] = static_cast<unsigned char>(height >> 24);
    ihdr[5] = static_cast<unsigned char>(height >> 16);
    ihdr[6] = static_cast<unsigned char>(height >> 8);
    ihdr[7] = static_cast<unsigned char>(height);
    ihdr[8] = 8;                                          // bit depth
    ihdr[9] = channels == 3 ? 2 : 0;                      // color type
    ihdr[10] = ihdr[11] = ihdr[12] = 0;                   // deflate / filter 0 / no interlace
    png_chunk(out, "IHDR", ihdr, sizeof(ihdr));
    png_chunk(out, "IDAT", z.data(), z.size());
    png_chunk(out, "IEND", nullptr, 0);
    return out;
}

inline void png_write(const std::filesystem::path& path, int width, int height, int channels,
                      const std::vector<unsigned char>& pixels) {
    auto bytes = png_encode(width, height, channels, pixels);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("png: cannot open for write: " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("png: short write: " + path.string());
}

}  // namespace gla::detail
