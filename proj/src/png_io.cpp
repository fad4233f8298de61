#include "ambigen/png_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <vector>

#include "ambigen/errors.hpp"

namespace ambigen {

namespace {

void put_u32(std::vector<uint8_t>& v, uint32_t x) {
    v.push_back(uint8_t(x >> 24));
    v.push_back(uint8_t(x >> 16));
    v.push_back(uint8_t(x >> 8));
    v.push_back(uint8_t(x));
}

void chunk(std::vector<uint8_t>& out, const char type[4], const std::vector<uint8_t>& data) {
    put_u32(out, uint32_t(data.size()));
    size_t crc_from = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    uint32_t crc = uint32_t(::crc32(0, out.data() + crc_from, uInt(out.size() - crc_from)));
    put_u32(out, crc);
}

} // namespace

void write_png_gray(const std::string& path, const Raster& img) {
    if (img.height <= 0 || img.width <= 0) throw EmptyImage("cannot write empty raster to " + path);

    std::vector<uint8_t> raw;
    raw.reserve(size_t(img.height) * (img.width + 1));
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);  // filter: none
        for (int x = 0; x < img.width; ++x) {
            double v = std::clamp(1.0 - img.at(y, x), 0.0, 1.0);
            raw.push_back(uint8_t(std::lround(v * 255.0)));
        }
    }
    uLongf zcap = compressBound(uLong(raw.size()));
    std::vector<uint8_t> z(zcap);
    if (compress2(z.data(), &zcap, raw.data(), uLong(raw.size()), 9) != Z_OK)
        throw Error("zlib compression failed for " + path);
    z.resize(zcap);

    std::vector<uint8_t> out{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    std::vector<uint8_t> ihdr;
    put_u32(ihdr, uint32_t(img.width));
    put_u32(ihdr, uint32_t(img.height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(0);  // grayscale
    ihdr.push_back(0);  // deflate
    ihdr.push_back(0);  // adaptive filtering
    ihdr.push_back(0);  // no interlace
    chunk(out, "IHDR", ihdr);
    chunk(out, "IDAT", z);
    chunk(out, "IEND", {});

    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw Error("cannot open " + path + " for writing");
    size_t wrote = std::fwrite(out.data(), 1, out.size(), f);
    std::fclose(f);
    if (wrote != out.size()) throw Error("short write to " + path);
}

} // namespace ambigen
