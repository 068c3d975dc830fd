#include <doctest.h>

#include "fd_check.hpp"
#include "mrdf/autodiff.hpp"
#include "mrdf/conv_ops.hpp"
#include "mrdf/errors.hpp"

using namespace mrdf;
using fdtest::fd_gradients;
using fdtest::random_mat;
using fdtest::rel_error;

namespace {

// Runs fd vs analytic for a graph builder over n random input matrices.
void check_op(const char* name,
              const std::vector<std::pair<Eigen::Index, Eigen::Index>>& shapes,
              const std::function<ad::Var(ad::Tape&, std::vector<ad::Var>&)>& build,
              double tol = 1e-6, std::uint64_t seed = 5) {
    Rng rng(seed);
    std::vector<Mat> inputs;
    for (auto [r, c] : shapes) inputs.push_back(random_mat(rng, r, c));

    auto value = [&](const std::vector<Mat>& ins) {
        ad::Tape t;
        std::vector<ad::Var> vars;
        for (const auto& m : ins) vars.push_back(t.leaf(m, true));
        return build(t, vars).scalar();
    };

    ad::Tape t;
    std::vector<ad::Var> vars;
    for (const auto& m : inputs) vars.push_back(t.leaf(m, true));
    ad::Var out = build(t, vars);
    t.backward(out);

    const auto fd = fd_gradients(value, inputs);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        INFO(name << " input " << k);
        CHECK(rel_error(vars[k].grad(), fd[k]) < tol);
    }
}

} // namespace

TEST_CASE("dense op gradients match central finite differences") {
    check_op("matmul+add", {{3, 4}, {4, 5}, {3, 5}},
             [](ad::Tape& t, std::vector<ad::Var>& v) {
                 return ad::mean_all(ad::add(ad::matmul(v[0], v[1]), v[2]));
             });
    check_op("add_rowvec", {{4, 3}, {1, 3}}, [](ad::Tape& t, std::vector<ad::Var>& v) {
        return ad::mean_all(ad::add_rowvec(v[0], v[1]));
    });
    check_op("hadamard/sub/scalar", {{3, 3}, {3, 3}}, [](ad::Tape& t, std::vector<ad::Var>& v) {
        return ad::sum_all(ad::scalar_mul(ad::mul(ad::sub(v[0], v[1]), v[0]), 0.3));
    });
    check_op("transpose", {{2, 5}, {2, 5}}, [](ad::Tape& t, std::vector<ad::Var>& v) {
        return ad::sum_all(ad::matmul(v[0], ad::transpose(v[1])));
    });
    check_op("relu", {{4, 4}}, [](ad::Tape& t, std::vector<ad::Var>& v) {
        return ad::sum_all(ad::relu(v[0]));
    });
    check_op("gelu", {{4, 4}}, [](ad::Tape& t, std::vector<ad::Var>& v) {
        return ad::sum_all(ad::gelu(v[0]));
    });
    check_op("row_softmax", {{3, 5}, {3, 5}}, [](ad::Tape& t, std::vector<ad::Var>& v) {
        return ad::sum_all(ad::mul(ad::row_softmax(v[0]), v[1]));
    });
    check_op("log_softmax", {{3, 5}, {3, 5}}, [](ad::Tape& t, std::vector<ad::Var>& v) {
        return ad::sum_all(ad::mul(ad::log_softmax_rows(v[0]), v[1]));
    });
    check_op("layer_norm", {{4, 6}, {1, 6}, {1, 6}}, [](ad::Tape& t, std::vector<ad::Var>& v) {
        return ad::mean_all(ad::layer_norm_rows(v[0], v[1], v[2]));
    });
    check_op("mean_rows", {{5, 3}}, [](ad::Tape& t, std::vector<ad::Var>& v) {
        return ad::sum_all(ad::mean_rows(v[0]));
    });
    check_op("concat+slice", {{3, 2}, {3, 4}}, [](ad::Tape& t, std::vector<ad::Var>& v) {
        ad::Var c = ad::concat_cols({v[0], v[1]});
        return ad::sum_all(ad::mul(ad::slice_cols(c, 1, 3), ad::slice_cols(c, 2, 3)));
    });
    check_op("concat_rows+slice_rows", {{2, 3}, {4, 3}}, [](ad::Tape& t, std::vector<ad::Var>& v) {
        ad::Var c = ad::concat_rows({v[0], v[1]});
        return ad::mean_all(ad::slice_rows(c, 1, 4));
    });
    check_op("row_normalize", {{4, 5}, {4, 5}}, [](ad::Tape& t, std::vector<ad::Var>& v) {
        return ad::sum_all(ad::mul(ad::row_normalize(v[0]), v[1]));
    });
    check_op("cosine_rows", {{4, 6}, {4, 6}}, [](ad::Tape& t, std::vector<ad::Var>& v) {
        return ad::sum_all(ad::cosine_rows(v[0], v[1]));
    });
}

TEST_CASE("conv, batch norm and pooling gradients match finite differences") {
    ad::Conv2dMeta meta;
    meta.in_channels = 2;
    meta.in_h = 5;
    meta.in_w = 6;
    meta.out_channels = 3;
    meta.kh = 3;
    meta.kw = 3;
    meta.stride_h = 2;
    meta.stride_w = 1;
    meta.pad_h = 1;
    meta.pad_w = 1;

    check_op("conv2d",
             {{3, 2 * 5 * 6}, {3, 2 * 3 * 3}, {1, 3}},
             [meta](ad::Tape& t, std::vector<ad::Var>& v) {
                 return ad::mean_all(ad::conv2d(v[0], v[1], v[2], meta));
             });

    Rng wrng(77);
    const Mat bn_weight = random_mat(wrng, 4, 12);
    check_op("batch_norm_train", {{4, 3 * 4}, {1, 3}, {1, 3}},
             [bn_weight](ad::Tape& t, std::vector<ad::Var>& v) {
                 Mat rm = Mat::Zero(1, 3), rv = Mat::Ones(1, 3);
                 // weight the output so per-channel gradients are nontrivial
                 ad::Var bn = ad::batch_norm2d(v[0], v[1], v[2], &rm, &rv, 3, true);
                 return ad::sum_all(ad::mul(bn, t.constant(bn_weight)));
             });

    check_op("global_avg_pool", {{3, 4 * 5}}, [](ad::Tape& t, std::vector<ad::Var>& v) {
        return ad::sum_all(ad::global_avg_pool2d(v[0], 4));
    });
}

TEST_CASE("batch norm updates running statistics in train mode and uses them in eval") {
    Rng rng(21);
    const Mat x = fdtest::random_mat(rng, 6, 2 * 3); // 2 channels, 3 spatial
    Mat rm = Mat::Zero(1, 2), rv = Mat::Ones(1, 2);

    ad::Tape t;
    ad::Var g = t.constant(Mat::Ones(1, 2));
    ad::Var b = t.constant(Mat::Zero(1, 2));
    (void)ad::batch_norm2d(t.leaf(x), g, b, &rm, &rv, 2, /*training=*/true, 0.1);
    for (int c = 0; c < 2; ++c) {
        const auto block = x.middleCols(c * 3, 3);
        const double mean = block.mean();
        const double var = (block.array() - mean).square().mean();
        CHECK(rm(0, c) == doctest::Approx(0.1 * mean).epsilon(1e-12));
        CHECK(rv(0, c) == doctest::Approx(0.9 + 0.1 * var).epsilon(1e-12));
    }

    // eval mode normalizes with the stored statistics and never mutates them
    const Mat rm_before = rm, rv_before = rv;
    ad::Tape t2;
    ad::Var out = ad::batch_norm2d(t2.leaf(x), t2.constant(Mat::Ones(1, 2)),
                                   t2.constant(Mat::Zero(1, 2)), &rm, &rv, 2, /*training=*/false);
    CHECK((rm - rm_before).cwiseAbs().maxCoeff() == 0.0);
    CHECK((rv - rv_before).cwiseAbs().maxCoeff() == 0.0);
    const double expect = (x(0, 0) - rm(0, 0)) / std::sqrt(rv(0, 0) + 1e-5);
    CHECK(out.value()(0, 0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("cosine_rows handles zero-norm rows without NaN") {
    ad::Tape t;
    Mat a = Mat::Zero(2, 3);
    a.row(1) << 1.0, 0.0, 0.0;
    Mat b(2, 3);
    b.row(0) << 1.0, 2.0, 3.0;
    b.row(1) << 1.0, 0.0, 0.0;
    ad::Var va = t.leaf(a, true);
    ad::Var vb = t.leaf(b, true);
    ad::Var c = ad::cosine_rows(va, vb);
    CHECK(c.value()(0, 0) == 0.0);
    CHECK(c.value()(1, 0) == doctest::Approx(1.0));
    t.backward(ad::sum_all(c));
    CHECK(va.grad().allFinite());
    CHECK(vb.grad().allFinite());
    CHECK(va.grad().row(0).norm() == 0.0);
}

TEST_CASE("gradients accumulate across reuse of a node") {
    ad::Tape t;
    Mat x0(2, 2);
    x0 << 1.0, 2.0, 3.0, 4.0;
    ad::Var x = t.leaf(x0, true);
    ad::Var y = ad::sum_all(ad::add(ad::mul(x, x), x)); // d/dx = 2x + 1
    t.backward(y);
    Mat expect = (2.0 * x0).array() + 1.0;
    CHECK(rel_error(x.grad(), expect.matrix()) < 1e-12);
}

TEST_CASE("backward twice and non-scalar roots are rejected") {
    ad::Tape t;
    ad::Var x = t.leaf(Mat::Ones(2, 2), true);
    CHECK_THROWS_AS(t.backward(x), NumericError);
    ad::Var s = ad::sum_all(x);
    t.backward(s);
    CHECK_THROWS_AS(t.backward(s), NumericError);
}

TEST_CASE("shape mismatches throw") {
    ad::Tape t;
    ad::Var a = t.leaf(Mat::Ones(2, 3));
    ad::Var b = t.leaf(Mat::Ones(3, 2));
    CHECK_THROWS_AS(ad::add(a, b), NumericError);
    CHECK_THROWS_AS(ad::matmul(a, a), NumericError);
    CHECK_THROWS_AS(ad::slice_cols(a, 2, 5), NumericError);
}

TEST_CASE("dropout is identity in eval mode and rescales in train mode") {
    Rng rng(3);
    ad::Tape t;
    ad::Var x = t.leaf(Mat::Ones(200, 10), true);
    ad::Var eval_out = ad::dropout(x, 0.5, rng, false);
    CHECK(eval_out.index() == x.index());

    ad::Var train_out = ad::dropout(x, 0.5, rng, true);
    const double mean = train_out.value().mean();
    CHECK(mean == doctest::Approx(1.0).epsilon(0.1)); // inverted dropout keeps scale
}
