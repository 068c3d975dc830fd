#include "mrdf/optimizer.hpp"

#include <cmath>

#include "mrdf/errors.hpp"

namespace mrdf {

void Adam::step(ParamStore& params, const std::map<std::string, Mat>& grads, double lr_scale) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (const auto& [name, g] : grads) {
        Mat& p = params.at(name);
        if (g.rows() != p.rows() || g.cols() != p.cols())
            throw NumericError("adam: gradient shape mismatch for " + name);
        auto mit = m_.find(name);
        if (mit == m_.end()) {
            m_[name] = Mat::Zero(p.rows(), p.cols());
            v_[name] = Mat::Zero(p.rows(), p.cols());
            mit = m_.find(name);
        }
        Mat& m = mit->second;
        Mat& v = v_[name];
        m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
        v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
        const Mat mhat = m / bc1;
        const Mat vhat = v / bc2;
        p.array() -= lr_scale * cfg_.lr * mhat.array() / (vhat.array().sqrt() + cfg_.eps);
    }
}

void Adam::save(Checkpoint& ck) const {
    ck.put_i64("adam.t", t_);
    for (const auto& [name, m] : m_) ck.put_mat("adam.m." + name, m);
    for (const auto& [name, v] : v_) ck.put_mat("adam.v." + name, v);
}

void Adam::load(const Checkpoint& ck) {
    t_ = ck.i64("adam.t");
    m_.clear();
    v_.clear();
    for (const auto& [name, m] : ck.mats()) {
        if (name.rfind("adam.m.", 0) == 0) m_[name.substr(7)] = m;
        if (name.rfind("adam.v.", 0) == 0) v_[name.substr(7)] = m;
    }
}

} // namespace mrdf
