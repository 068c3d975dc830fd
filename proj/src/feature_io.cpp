#include "mrdf/feature_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "mrdf/errors.hpp"

namespace mrdf {

namespace {

constexpr char kMagic[8] = {'M', 'R', 'D', 'F', 'F', 'T', '0', '1'};

void put_u32(std::ofstream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace

void write_feature_matrix(const std::string& path, const Mat& m) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open feature file for writing: " + path);
    os.write(kMagic, sizeof(kMagic));
    put_u32(os, static_cast<std::uint32_t>(m.rows()));
    put_u32(os, static_cast<std::uint32_t>(m.cols()));
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
        os.write(reinterpret_cast<const char*>(row.data()),
                 static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
    if (!os) throw DataError("failed writing feature file: " + path);
}

Mat read_feature_matrix(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open feature file: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("bad feature file magic in " + path);
    const std::uint32_t rows = get_u32(is);
    const std::uint32_t cols = get_u32(is);
    if (!is) throw DataError("truncated feature file header: " + path);
    if (rows == 0 || cols == 0) throw DataError("empty feature matrix in " + path);
    Mat m(rows, cols);
    std::vector<double> row(cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
        is.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(double)));
        if (!is) throw DataError("truncated feature file payload: " + path);
        for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = row[c];
    }
    return m;
}

} // namespace mrdf
