#include "mrdf/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "mrdf/errors.hpp"

namespace mrdf {

namespace {

constexpr char kMagic[8] = {'M', 'R', 'D', 'F', 'C', 'K', 'P', '1'};

enum EntryType : std::uint8_t { kMat = 1, kStr = 2, kI64 = 3, kF64 = 4 };

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void put_name(std::ostream& os, const std::string& name) {
    put_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
}

std::string get_name(std::istream& is) {
    const std::uint32_t len = get_u32(is);
    std::string s(len, '\0');
    is.read(s.data(), len);
    return s;
}

void put_doubles(std::ostream& os, const double* data, std::size_t n) {
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

} // namespace

const Mat& Checkpoint::mat(const std::string& name) const {
    auto it = mats_.find(name);
    if (it == mats_.end()) throw DataError("checkpoint: missing tensor '" + name + "'");
    return it->second;
}

const std::string& Checkpoint::str(const std::string& name) const {
    auto it = strs_.find(name);
    if (it == strs_.end()) throw DataError("checkpoint: missing string '" + name + "'");
    return it->second;
}

std::int64_t Checkpoint::i64(const std::string& name) const {
    auto it = ints_.find(name);
    if (it == ints_.end()) throw DataError("checkpoint: missing integer '" + name + "'");
    return it->second;
}

double Checkpoint::f64(const std::string& name) const {
    auto it = floats_.find(name);
    if (it == floats_.end()) throw DataError("checkpoint: missing float '" + name + "'");
    return it->second;
}

void Checkpoint::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open checkpoint for writing: " + path);
    os.write(kMagic, sizeof(kMagic));
    put_u32(os, kVersion);
    put_u64(os, mats_.size() + strs_.size() + ints_.size() + floats_.size());
    for (const auto& [name, m] : mats_) {
        os.put(static_cast<char>(kMat));
        put_name(os, name);
        put_u32(os, static_cast<std::uint32_t>(m.rows()));
        put_u32(os, static_cast<std::uint32_t>(m.cols()));
        // Eigen is column-major; write row-major for a stable file layout.
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
            put_doubles(os, row.data(), row.size());
        }
    }
    for (const auto& [name, s] : strs_) {
        os.put(static_cast<char>(kStr));
        put_name(os, name);
        put_u64(os, s.size());
        os.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    for (const auto& [name, v] : ints_) {
        os.put(static_cast<char>(kI64));
        put_name(os, name);
        put_u64(os, static_cast<std::uint64_t>(v));
    }
    for (const auto& [name, v] : floats_) {
        os.put(static_cast<char>(kF64));
        put_name(os, name);
        put_doubles(os, &v, 1);
    }
    if (!os) throw DataError("failed writing checkpoint: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("checkpoint not found: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("bad checkpoint magic in " + path);
    const std::uint32_t version = get_u32(is);
    if (version != kVersion)
        throw DataError("checkpoint version mismatch in " + path + ": file has " +
                        std::to_string(version) + ", reader supports " + std::to_string(kVersion));
    const std::uint64_t n = get_u64(is);

    Checkpoint ck;
    for (std::uint64_t e = 0; e < n; ++e) {
        const int type = is.get();
        if (type == EOF) throw DataError("truncated checkpoint: " + path);
        const std::string name = get_name(is);
        switch (type) {
        case kMat: {
            const std::uint32_t rows = get_u32(is);
            const std::uint32_t cols = get_u32(is);
            Mat m(rows, cols);
            std::vector<double> row(cols);
            for (std::uint32_t r = 0; r < rows; ++r) {
                is.read(reinterpret_cast<char*>(row.data()),
                        static_cast<std::streamsize>(cols * sizeof(double)));
                for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = row[c];
            }
            ck.mats_[name] = std::move(m);
            break;
        }
        case kStr: {
            const std::uint64_t len = get_u64(is);
            std::string s(len, '\0');
            is.read(s.data(), static_cast<std::streamsize>(len));
            ck.strs_[name] = std::move(s);
            break;
        }
        case kI64:
            ck.ints_[name] = static_cast<std::int64_t>(get_u64(is));
            break;
        case kF64: {
            double v = 0.0;
            is.read(reinterpret_cast<char*>(&v), sizeof(v));
            ck.floats_[name] = v;
            break;
        }
        default:
            throw DataError("corrupt checkpoint entry type in " + path);
        }
        if (!is) throw DataError("truncated checkpoint: " + path);
    }
    return ck;
}

} // namespace mrdf
