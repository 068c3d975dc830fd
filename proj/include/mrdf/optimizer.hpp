#pragma once

#include <map>
#include <string>

#include "mrdf/checkpoint.hpp"
#include "mrdf/params.hpp"

namespace mrdf {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

    // Applies one update; lr_scale multiplies the base rate (for schedules).
    void step(ParamStore& params, const std::map<std::string, Mat>& grads, double lr_scale = 1.0);

    long steps_taken() const { return t_; }

    void save(Checkpoint& ck) const;
    void load(const Checkpoint& ck);

private:
    AdamConfig cfg_;
    long t_ = 0;
    std::map<std::string, Mat> m_;
    std::map<std::string, Mat> v_;
};

} // namespace mrdf
