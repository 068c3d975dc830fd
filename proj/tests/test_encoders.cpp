#include <doctest.h>

#include "fd_check.hpp"
#include "mrdf/encoders.hpp"
#include "mrdf/errors.hpp"

using namespace mrdf;
using fdtest::random_mat;
using fdtest::rel_error;

namespace {

EncoderConfig mlp_config(int in_dim, int out_dim, std::vector<int> hidden = {8}) {
    EncoderConfig cfg;
    cfg.arch = EncoderArch::SmallMlp;
    cfg.out_dim = out_dim;
    cfg.input_shape = {in_dim};
    cfg.hidden_dims = std::move(hidden);
    return cfg;
}

} // namespace

TEST_CASE("mlp encoder obeys the shape contract") {
    Encoder enc(mlp_config(80, 512), "enc_a");
    ParamStore store;
    Rng rng(1);
    enc.init_params(store, rng);

    ad::Tape tape;
    Binding b = bind(store, tape, false, false);
    ad::Var out = enc.forward(b, tape.constant(random_mat(rng, 5, 80)));
    CHECK(out.rows() == 5);
    CHECK(out.cols() == 512);
}

TEST_CASE("identity-initialized single-layer mlp passes rows through") {
    Encoder enc(mlp_config(6, 6, {}), "enc_a");
    ParamStore store;
    Rng rng(2);
    enc.init_params(store, rng);
    store.at("enc_a.l0.w") = Mat::Identity(6, 6);
    store.at("enc_a.l0.b") = Mat::Zero(1, 6);

    ad::Tape tape;
    Binding b = bind(store, tape, false, false);
    const Mat in = random_mat(rng, 4, 6);
    ad::Var out = enc.forward(b, tape.constant(in));
    CHECK((out.value() - in).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero input through zero-bias mlp gives zero output") {
    Encoder enc(mlp_config(5, 7, {9}), "enc_a");
    ParamStore store;
    Rng rng(3);
    enc.init_params(store, rng); // biases start at zero
    ad::Tape tape;
    Binding b = bind(store, tape, false, false);
    ad::Var out = enc.forward(b, tape.constant(Mat::Zero(3, 5)));
    CHECK(out.value().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("frame-wise locality: permuting input frames permutes output rows") {
    Encoder enc(mlp_config(6, 4), "enc_a");
    ParamStore store;
    Rng rng(4);
    enc.init_params(store, rng);

    const Mat in = random_mat(rng, 5, 6);
    Mat permuted(5, 6);
    const int perm[5] = {3, 0, 4, 1, 2};
    for (int i = 0; i < 5; ++i) permuted.row(i) = in.row(perm[i]);

    ad::Tape t1, t2;
    Binding b1 = bind(store, t1, false, false);
    Binding b2 = bind(store, t2, false, false);
    const Mat out = enc.forward(b1, t1.constant(in)).value();
    const Mat out_p = enc.forward(b2, t2.constant(permuted)).value();
    for (int i = 0; i < 5; ++i)
        CHECK((out_p.row(i) - out.row(perm[i])).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mlp encoder gradients match finite differences w.r.t. params and input") {
    Encoder enc(mlp_config(4, 3, {5}), "enc_a");
    ParamStore store;
    Rng rng(5);
    enc.init_params(store, rng);
    const Mat input = random_mat(rng, 3, 4);

    auto value = [&](const std::map<std::string, Mat>& tensors, const Mat& in) {
        ParamStore s2;
        for (const auto& [name, m] : tensors) s2.add(name, m);
        ad::Tape t;
        Binding b = bind(s2, t, false, false);
        return ad::sum_all(enc.forward(b, t.constant(in))).scalar();
    };

    ad::Tape t;
    Binding b = bind(store, t, false, true);
    ad::Var in_var = t.leaf(input, true);
    t.backward(ad::sum_all(enc.forward(b, in_var)));

    const double step = 1e-5;
    for (const auto& [name, m] : store.tensors()) {
        Mat fd(m.rows(), m.cols());
        auto tensors = store.tensors();
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            tensors[name](i) = m(i) + step;
            const double up = value(tensors, input);
            tensors[name](i) = m(i) - step;
            const double dn = value(tensors, input);
            tensors[name](i) = m(i);
            fd(i) = (up - dn) / (2.0 * step);
        }
        INFO("param " << name);
        CHECK(rel_error(b[name].grad(), fd) < 1e-6);
    }
    Mat fd_in(input.rows(), input.cols());
    Mat in_copy = input;
    for (Eigen::Index i = 0; i < input.size(); ++i) {
        in_copy(i) = input(i) + step;
        const double up = value(store.tensors(), in_copy);
        in_copy(i) = input(i) - step;
        const double dn = value(store.tensors(), in_copy);
        in_copy(i) = input(i);
        fd_in(i) = (up - dn) / (2.0 * step);
    }
    CHECK(rel_error(in_var.grad(), fd_in) < 1e-6);
}

TEST_CASE("resnet encoder shape contract on image frames") {
    EncoderConfig cfg;
    cfg.arch = EncoderArch::Resnet18Style;
    cfg.out_dim = 512;
    cfg.input_shape = {88, 88, 1};
    Encoder enc(cfg, "enc_v");
    ParamStore store;
    Rng rng(6);
    enc.init_params(store, rng);

    ad::Tape tape;
    Binding b = bind(store, tape, false, false);
    ad::Var out = enc.forward(b, tape.constant(random_mat(rng, 2, 88 * 88)));
    CHECK(out.rows() == 2);
    CHECK(out.cols() == 512);
}

TEST_CASE("resnet encoder handles vector frames via 1-D convolution") {
    EncoderConfig cfg;
    cfg.arch = EncoderArch::Resnet18Style;
    cfg.out_dim = 32;
    cfg.input_shape = {64};
    cfg.base_channels = 8;
    Encoder enc(cfg, "enc_a");
    ParamStore store;
    Rng rng(7);
    enc.init_params(store, rng);

    ad::Tape tape;
    Binding b = bind(store, tape, true, false);
    ad::Var out = enc.forward(b, tape.constant(random_mat(rng, 3, 64)));
    CHECK(out.rows() == 3);
    CHECK(out.cols() == 32);
}

TEST_CASE("resnet encoder gradient spot-check on a tiny input") {
    EncoderConfig cfg;
    cfg.arch = EncoderArch::Resnet18Style;
    cfg.out_dim = 4;
    cfg.input_shape = {12, 12, 1};
    cfg.base_channels = 4;
    Encoder enc(cfg, "enc_v");
    ParamStore store;
    Rng rng(8);
    enc.init_params(store, rng);
    const Mat input = random_mat(rng, 2, 12 * 12);

    // weight output elements unevenly so gradients do not cancel
    const Mat w = random_mat(rng, 2, 4);

    auto value = [&](ParamStore& s) {
        ad::Tape t;
        Binding b = bind(s, t, true, false);
        return ad::sum_all(ad::mul(enc.forward(b, t.constant(input)), t.constant(w))).scalar();
    };

    ad::Tape t;
    Binding b = bind(store, t, true, true);
    t.backward(ad::sum_all(ad::mul(enc.forward(b, t.constant(input)), t.constant(w))));

    // spot-check a handful of parameters across layers
    Rng pick(9);
    const double step = 1e-5;
    int checked = 0;
    for (const auto& [name, m] : store.tensors()) {
        if (store.is_buffer(name)) continue;
        if (pick.uniform01() > 0.25 && checked > 0) continue;
        const auto i = static_cast<Eigen::Index>(pick.below(static_cast<std::uint64_t>(m.size())));
        ParamStore copy;
        for (const auto& [n2, m2] : store.tensors()) copy.add(n2, m2, store.is_buffer(n2));
        copy.at(name)(i) = m(i) + step;
        const double up = value(copy);
        copy.at(name)(i) = m(i) - step;
        const double dn = value(copy);
        const double fd = (up - dn) / (2.0 * step);
        const double an = b[name].grad()(i);
        INFO("param " << name << " idx " << i);
        CHECK(std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)}) < 1e-5);
        ++checked;
    }
    CHECK(checked >= 5);
}

TEST_CASE("encoder rejects mismatched frame dims") {
    Encoder enc(mlp_config(6, 4), "enc_a");
    ParamStore store;
    Rng rng(10);
    enc.init_params(store, rng);
    ad::Tape tape;
    Binding b = bind(store, tape, false, false);
    CHECK_THROWS_AS(enc.forward(b, tape.constant(Mat::Zero(3, 7))), NumericError);
}
