#include "xlalign/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "xlalign/errors.hpp"

namespace xlalign {

namespace {

constexpr char kMagic[4] = {'X', 'A', 'L', 'N'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& out, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    put_u64(out, bits);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) {
        throw DataError("checkpoint: truncated file");
    }
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
        v = (v << 8) | b[i];
    }
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) {
        throw DataError("checkpoint: truncated file");
    }
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | b[i];
    }
    return v;
}

double get_f64(std::istream& in) {
    const std::uint64_t bits = get_u64(in);
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
}

} // namespace

void save_checkpoint(const std::string& path, const ParamVector& sections) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("checkpoint: cannot open '" + path + "' for writing");
    }
    out.write(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(sections.segment_count()));
    for (const auto& [name, m] : sections) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u64(out, m.rows());
        put_u64(out, m.cols());
        for (double x : m.values()) {
            put_f64(out, x);
        }
    }
    if (!out) {
        throw DataError("checkpoint: write failed for '" + path + "'");
    }
}

ParamVector load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("checkpoint: cannot open '" + path + "'");
    }
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw DataError("checkpoint: bad magic in '" + path + "'");
    }
    const std::uint32_t version = get_u32(in);
    if (version != kVersion) {
        throw DataError("checkpoint: unsupported version " + std::to_string(version));
    }
    const std::uint32_t count = get_u32(in);
    ParamVector sections;
    for (std::uint32_t k = 0; k < count; ++k) {
        const std::uint32_t name_len = get_u32(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (!in) {
            throw DataError("checkpoint: truncated section name");
        }
        const std::uint64_t rows = get_u64(in);
        const std::uint64_t cols = get_u64(in);
        Matrix m(rows, cols);
        for (std::size_t i = 0; i < m.size(); ++i) {
            m.data()[i] = get_f64(in);
        }
        if (!m.is_finite()) {
            throw DataError("checkpoint: non-finite values in section '" + name + "'");
        }
        sections.add(name, std::move(m));
    }
    return sections;
}

} // namespace xlalign
