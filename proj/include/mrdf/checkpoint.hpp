#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "mrdf/types.hpp"

namespace mrdf {

// Version-tagged container of named entries (tensors, strings, scalars) with
// a fixed little-endian binary layout. Used for model checkpoints, optimizer
// state and training state.
class Checkpoint {
public:
    static constexpr std::uint32_t kVersion = 1;

    void put_mat(const std::string& name, Mat m) { mats_[name] = std::move(m); }
    void put_str(const std::string& name, std::string s) { strs_[name] = std::move(s); }
    void put_i64(const std::string& name, std::int64_t v) { ints_[name] = v; }
    void put_f64(const std::string& name, double v) { floats_[name] = v; }

    bool has_mat(const std::string& name) const { return mats_.count(name) > 0; }
    bool has_str(const std::string& name) const { return strs_.count(name) > 0; }
    bool has_i64(const std::string& name) const { return ints_.count(name) > 0; }
    bool has_f64(const std::string& name) const { return floats_.count(name) > 0; }

    const Mat& mat(const std::string& name) const;        // throws DataError when missing
    const std::string& str(const std::string& name) const;
    std::int64_t i64(const std::string& name) const;
    double f64(const std::string& name) const;

    const std::map<std::string, Mat>& mats() const { return mats_; }

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path); // throws DataError on bad magic/version

private:
    std::map<std::string, Mat> mats_;
    std::map<std::string, std::string> strs_;
    std::map<std::string, std::int64_t> ints_;
    std::map<std::string, double> floats_;
};

} // namespace mrdf
