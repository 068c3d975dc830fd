#pragma once

#include <map>
#include <set>
#include <string>
#include <unordered_map>

#include "mrdf/autodiff.hpp"

namespace mrdf {

// Named parameter tensors plus non-trainable buffers (e.g. batch-norm running
// statistics). Ordered by name so iteration, optimizer state, and checkpoints
// are deterministic.
class ParamStore {
public:
    Mat& add(const std::string& name, Mat value, bool buffer = false);
    Mat& at(const std::string& name);
    const Mat& at(const std::string& name) const;
    bool has(const std::string& name) const { return tensors_.count(name) > 0; }
    bool is_buffer(const std::string& name) const { return buffers_.count(name) > 0; }

    std::map<std::string, Mat>& tensors() { return tensors_; }
    const std::map<std::string, Mat>& tensors() const { return tensors_; }
    std::size_t parameter_count() const; // trainable scalars

private:
    std::map<std::string, Mat> tensors_;
    std::set<std::string> buffers_;
};

// Tape leaves for every trainable tensor of a store, for one forward/backward
// pass. Buffers are reached through the store pointer (batch-norm updates its
// running statistics in place during training).
struct Binding {
    ad::Tape* tape = nullptr;
    ParamStore* store = nullptr;
    bool training = false;
    std::unordered_map<std::string, ad::Var> vars;

    ad::Var operator[](const std::string& name) const;
};

Binding bind(ParamStore& store, ad::Tape& tape, bool training, bool with_grad);

// Initializers.
Mat xavier_uniform(Rng& rng, Eigen::Index fan_in, Eigen::Index fan_out);
Mat he_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in);

} // namespace mrdf
