#include "mrdf/params.hpp"

#include "mrdf/errors.hpp"

namespace mrdf {

Mat& ParamStore::add(const std::string& name, Mat value, bool buffer) {
    if (tensors_.count(name)) throw NumericError("duplicate parameter name: " + name);
    if (buffer) buffers_.insert(name);
    return tensors_[name] = std::move(value);
}

Mat& ParamStore::at(const std::string& name) {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw NumericError("unknown parameter: " + name);
    return it->second;
}

const Mat& ParamStore::at(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw NumericError("unknown parameter: " + name);
    return it->second;
}

std::size_t ParamStore::parameter_count() const {
    std::size_t n = 0;
    for (const auto& [name, m] : tensors_)
        if (!buffers_.count(name)) n += static_cast<std::size_t>(m.size());
    return n;
}

ad::Var Binding::operator[](const std::string& name) const {
    auto it = vars.find(name);
    if (it == vars.end()) throw NumericError("parameter not bound: " + name);
    return it->second;
}

Binding bind(ParamStore& store, ad::Tape& tape, bool training, bool with_grad) {
    Binding b;
    b.tape = &tape;
    b.store = &store;
    b.training = training;
    for (const auto& [name, value] : store.tensors()) {
        if (store.is_buffer(name)) continue;
        b.vars.emplace(name, tape.leaf(value, with_grad));
    }
    return b;
}

Mat xavier_uniform(Rng& rng, Eigen::Index fan_in, Eigen::Index fan_out) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Mat m(fan_in, fan_out);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform(-bound, bound);
    return m;
}

Mat he_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.gaussian(0.0, stddev);
    return m;
}

} // namespace mrdf
