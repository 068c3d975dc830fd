#include "mrdf/autodiff.hpp"

#include <cmath>
#include <stdexcept>

#include "mrdf/errors.hpp"

namespace mrdf::ad {

namespace {

void check_same_shape(const Var& a, const Var& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw NumericError(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) +
                           "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                           "x" + std::to_string(b.cols()) + ")");
}

void check_same_tape(const Var& a, const Var& b, const char* op) {
    if (a.tape() != b.tape()) throw NumericError(std::string(op) + ": vars on different tapes");
}

} // namespace

const Mat& Var::value() const { return tape_->val(index_); }

Mat Var::grad() const { return tape_->grad_of(*this); }

Var Tape::leaf(Mat value, bool requires_grad) {
    return make(std::move(value), requires_grad, nullptr);
}

Var Tape::make(Mat value, bool needs_grad, BackpropFn backprop) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    if (needs_grad) n.backprop = std::move(backprop);
    nodes_.push_back(std::move(n));
    return Var(this, static_cast<int>(nodes_.size()) - 1);
}

bool Tape::needs_grad(const Var& v) const {
    return nodes_[static_cast<std::size_t>(v.index())].needs_grad;
}

void Tape::accumulate(int index, const Mat& g) {
    Node& n = nodes_[static_cast<std::size_t>(index)];
    if (!n.needs_grad) return;
    if (!n.grad_set) {
        n.grad = g;
        n.grad_set = true;
    } else {
        n.grad += g;
    }
}

const Mat& Tape::val(int index) const { return nodes_[static_cast<std::size_t>(index)].value; }

void Tape::backward(const Var& root) {
    if (backward_done_) throw NumericError("tape: backward() called twice");
    if (root.rows() != 1 || root.cols() != 1)
        throw NumericError("tape: backward root must be a 1x1 scalar");
    backward_done_ = true;
    accumulate(root.index(), Mat::Ones(1, 1));
    for (int i = root.index(); i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (n.grad_set && n.backprop) n.backprop(n.grad);
    }
}

// Var::grad needs access to node storage; route through a small helper.
Mat Tape::grad_of(const Var& v) const {
    const Node& n = nodes_[static_cast<std::size_t>(v.index())];
    if (n.grad_set) return n.grad;
    return Mat::Zero(n.value.rows(), n.value.cols());
}

// ---------------------------------------------------------------------------

Var add(Var a, Var b) {
    check_same_tape(a, b, "add");
    check_same_shape(a, b, "add");
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a) || t->needs_grad(b);
    const int ia = a.index(), ib = b.index();
    return t->make(a.value() + b.value(), ng, [t, ia, ib](const Mat& g) {
        t->accumulate(ia, g);
        t->accumulate(ib, g);
    });
}

Var add_rowvec(Var a, Var row) {
    check_same_tape(a, row, "add_rowvec");
    if (row.rows() != 1 || row.cols() != a.cols())
        throw NumericError("add_rowvec: expected [1 x C] broadcast operand");
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a) || t->needs_grad(row);
    const int ia = a.index(), ir = row.index();
    Mat v = a.value();
    v.rowwise() += row.value().row(0);
    return t->make(std::move(v), ng, [t, ia, ir](const Mat& g) {
        t->accumulate(ia, g);
        t->accumulate(ir, g.colwise().sum());
    });
}

Var sub(Var a, Var b) {
    check_same_tape(a, b, "sub");
    check_same_shape(a, b, "sub");
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a) || t->needs_grad(b);
    const int ia = a.index(), ib = b.index();
    return t->make(a.value() - b.value(), ng, [t, ia, ib](const Mat& g) {
        t->accumulate(ia, g);
        t->accumulate(ib, -g);
    });
}

Var neg(Var a) { return scalar_mul(a, -1.0); }

Var mul(Var a, Var b) {
    check_same_tape(a, b, "mul");
    check_same_shape(a, b, "mul");
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a) || t->needs_grad(b);
    const int ia = a.index(), ib = b.index();
    return t->make(a.value().cwiseProduct(b.value()), ng, [t, ia, ib](const Mat& g) {
        t->accumulate(ia, g.cwiseProduct(t->val(ib)));
        t->accumulate(ib, g.cwiseProduct(t->val(ia)));
    });
}

Var scalar_mul(Var a, double s) {
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a);
    const int ia = a.index();
    return t->make(a.value() * s, ng, [t, ia, s](const Mat& g) { t->accumulate(ia, g * s); });
}

Var scalar_add(Var a, double s) {
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a);
    const int ia = a.index();
    return t->make((a.value().array() + s).matrix(), ng,
                   [t, ia](const Mat& g) { t->accumulate(ia, g); });
}

Var matmul(Var a, Var b) {
    check_same_tape(a, b, "matmul");
    if (a.cols() != b.rows())
        throw NumericError("matmul: inner dimensions differ (" + std::to_string(a.cols()) +
                           " vs " + std::to_string(b.rows()) + ")");
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a) || t->needs_grad(b);
    const int ia = a.index(), ib = b.index();
    return t->make(a.value() * b.value(), ng, [t, ia, ib](const Mat& g) {
        t->accumulate(ia, g * t->val(ib).transpose());
        t->accumulate(ib, t->val(ia).transpose() * g);
    });
}

Var transpose(Var a) {
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a);
    const int ia = a.index();
    return t->make(a.value().transpose(), ng,
                   [t, ia](const Mat& g) { t->accumulate(ia, g.transpose()); });
}

Var relu(Var a) {
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a);
    const int ia = a.index();
    return t->make(a.value().cwiseMax(0.0), ng, [t, ia](const Mat& g) {
        const Mat mask = (t->val(ia).array() > 0.0).cast<double>().matrix();
        t->accumulate(ia, g.cwiseProduct(mask));
    });
}

Var gelu(Var a) {
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a);
    const int ia = a.index();
    const Mat& x = a.value();
    Mat y(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        y(i) = 0.5 * x(i) * (1.0 + std::erf(x(i) * M_SQRT1_2));
    return t->make(std::move(y), ng, [t, ia](const Mat& g) {
        const Mat& x = t->val(ia);
        Mat d(x.rows(), x.cols());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double cdf = 0.5 * (1.0 + std::erf(x(i) * M_SQRT1_2));
            const double pdf = std::exp(-0.5 * x(i) * x(i)) / std::sqrt(2.0 * M_PI);
            d(i) = cdf + x(i) * pdf;
        }
        t->accumulate(ia, g.cwiseProduct(d));
    });
}

Var row_softmax(Var a) {
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a);
    const int ia = a.index();
    const Mat& x = a.value();
    Mat s(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double m = x.row(r).maxCoeff();
        Eigen::RowVectorXd e = (x.row(r).array() - m).exp().matrix();
        s.row(r) = e / e.sum();
    }
    Mat sm = s;
    return t->make(std::move(s), ng, [t, ia, sm](const Mat& g) {
        Mat dx(g.rows(), g.cols());
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
            const double dot = g.row(r).dot(sm.row(r));
            dx.row(r) = sm.row(r).cwiseProduct((g.row(r).array() - dot).matrix());
        }
        t->accumulate(ia, dx);
    });
}

Var log_softmax_rows(Var a) {
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a);
    const int ia = a.index();
    const Mat& x = a.value();
    Mat lsm(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double m = x.row(r).maxCoeff();
        const double lse = m + std::log((x.row(r).array() - m).exp().sum());
        lsm.row(r) = (x.row(r).array() - lse).matrix();
    }
    Mat sm = lsm.array().exp().matrix();
    return t->make(std::move(lsm), ng, [t, ia, sm](const Mat& g) {
        Mat dx = g;
        for (Eigen::Index r = 0; r < g.rows(); ++r) dx.row(r) -= g.row(r).sum() * sm.row(r);
        t->accumulate(ia, dx);
    });
}

Var layer_norm_rows(Var x, Var gain, Var bias, double eps) {
    check_same_tape(x, gain, "layer_norm");
    check_same_tape(x, bias, "layer_norm");
    if (gain.rows() != 1 || gain.cols() != x.cols() || bias.rows() != 1 || bias.cols() != x.cols())
        throw NumericError("layer_norm: gain/bias must be [1 x C]");
    Tape* t = x.tape();
    const bool ng = t->needs_grad(x) || t->needs_grad(gain) || t->needs_grad(bias);
    const int ix = x.index(), ig = gain.index(), ib = bias.index();

    const Mat& xv = x.value();
    const Eigen::Index C = xv.cols();
    Mat xhat(xv.rows(), C);
    Vec inv_std(xv.rows());
    for (Eigen::Index r = 0; r < xv.rows(); ++r) {
        const double mu = xv.row(r).mean();
        const double var = (xv.row(r).array() - mu).square().mean();
        inv_std(r) = 1.0 / std::sqrt(var + eps);
        xhat.row(r) = ((xv.row(r).array() - mu) * inv_std(r)).matrix();
    }
    Mat y = xhat;
    y.array().rowwise() *= gain.value().row(0).array();
    y.rowwise() += bias.value().row(0);

    return t->make(std::move(y), ng, [t, ix, ig, ib, xhat, inv_std](const Mat& g) {
        const Eigen::Index C = g.cols();
        const Mat& gamma = t->val(ig);
        t->accumulate(ib, g.colwise().sum());
        t->accumulate(ig, g.cwiseProduct(xhat).colwise().sum());
        Mat dx(g.rows(), C);
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
            Eigen::RowVectorXd dxhat = g.row(r).cwiseProduct(gamma.row(0));
            const double m1 = dxhat.mean();
            const double m2 = dxhat.cwiseProduct(xhat.row(r)).mean();
            dx.row(r) = (inv_std(r) * (dxhat.array() - m1 - xhat.row(r).array() * m2)).matrix();
        }
        t->accumulate(ix, dx);
    });
}

Var mean_rows(Var a) {
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a);
    const int ia = a.index();
    const double inv = 1.0 / static_cast<double>(a.rows());
    const Eigen::Index rows = a.rows();
    return t->make(a.value().colwise().mean(), ng, [t, ia, inv, rows](const Mat& g) {
        Mat dx = (g * inv).replicate(rows, 1);
        t->accumulate(ia, dx);
    });
}

Var mean_all(Var a) {
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a);
    const int ia = a.index();
    const double inv = 1.0 / static_cast<double>(a.rows() * a.cols());
    const Eigen::Index rows = a.rows(), cols = a.cols();
    return t->make(Mat::Constant(1, 1, a.value().mean()), ng, [t, ia, inv, rows, cols](const Mat& g) {
        t->accumulate(ia, Mat::Constant(rows, cols, g(0, 0) * inv));
    });
}

Var sum_all(Var a) {
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a);
    const int ia = a.index();
    const Eigen::Index rows = a.rows(), cols = a.cols();
    return t->make(Mat::Constant(1, 1, a.value().sum()), ng, [t, ia, rows, cols](const Mat& g) {
        t->accumulate(ia, Mat::Constant(rows, cols, g(0, 0)));
    });
}

Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw NumericError("concat_cols: no parts");
    Tape* t = parts[0].tape();
    Eigen::Index cols = 0;
    bool ng = false;
    for (const auto& p : parts) {
        check_same_tape(parts[0], p, "concat_cols");
        if (p.rows() != parts[0].rows()) throw NumericError("concat_cols: row mismatch");
        cols += p.cols();
        ng = ng || t->needs_grad(p);
    }
    Mat v(parts[0].rows(), cols);
    std::vector<int> idx;
    std::vector<Eigen::Index> widths;
    Eigen::Index off = 0;
    for (const auto& p : parts) {
        v.middleCols(off, p.cols()) = p.value();
        idx.push_back(p.index());
        widths.push_back(p.cols());
        off += p.cols();
    }
    return t->make(std::move(v), ng, [t, idx, widths](const Mat& g) {
        Eigen::Index off = 0;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            t->accumulate(idx[i], g.middleCols(off, widths[i]));
            off += widths[i];
        }
    });
}

Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw NumericError("concat_rows: no parts");
    Tape* t = parts[0].tape();
    Eigen::Index rows = 0;
    bool ng = false;
    for (const auto& p : parts) {
        check_same_tape(parts[0], p, "concat_rows");
        if (p.cols() != parts[0].cols()) throw NumericError("concat_rows: column mismatch");
        rows += p.rows();
        ng = ng || t->needs_grad(p);
    }
    Mat v(rows, parts[0].cols());
    std::vector<int> idx;
    std::vector<Eigen::Index> heights;
    Eigen::Index off = 0;
    for (const auto& p : parts) {
        v.middleRows(off, p.rows()) = p.value();
        idx.push_back(p.index());
        heights.push_back(p.rows());
        off += p.rows();
    }
    return t->make(std::move(v), ng, [t, idx, heights](const Mat& g) {
        Eigen::Index off = 0;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            t->accumulate(idx[i], g.middleRows(off, heights[i]));
            off += heights[i];
        }
    });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index len) {
    if (start < 0 || len < 1 || start + len > a.cols())
        throw NumericError("slice_cols: out of range");
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a);
    const int ia = a.index();
    const Eigen::Index rows = a.rows(), cols = a.cols();
    return t->make(a.value().middleCols(start, len), ng,
                   [t, ia, start, len, rows, cols](const Mat& g) {
                       Mat dx = Mat::Zero(rows, cols);
                       dx.middleCols(start, len) = g;
                       t->accumulate(ia, dx);
                   });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index len) {
    if (start < 0 || len < 1 || start + len > a.rows())
        throw NumericError("slice_rows: out of range");
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a);
    const int ia = a.index();
    const Eigen::Index rows = a.rows(), cols = a.cols();
    return t->make(a.value().middleRows(start, len), ng,
                   [t, ia, start, len, rows, cols](const Mat& g) {
                       Mat dx = Mat::Zero(rows, cols);
                       dx.middleRows(start, len) = g;
                       t->accumulate(ia, dx);
                   });
}

Var row_normalize(Var a) {
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a);
    const int ia = a.index();
    const Mat& x = a.value();
    Vec norms(x.rows());
    Mat y(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        norms(r) = x.row(r).norm();
        y.row(r) = norms(r) > 0.0 ? (x.row(r) / norms(r)).eval() : x.row(r);
    }
    Mat yh = y;
    return t->make(std::move(y), ng, [t, ia, yh, norms](const Mat& g) {
        Mat dx(g.rows(), g.cols());
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
            if (norms(r) > 0.0) {
                const double gr = g.row(r).dot(yh.row(r));
                dx.row(r) = (g.row(r) - gr * yh.row(r)) / norms(r);
            } else {
                dx.row(r).setZero();
            }
        }
        t->accumulate(ia, dx);
    });
}

Var cosine_rows(Var a, Var b) {
    check_same_tape(a, b, "cosine_rows");
    check_same_shape(a, b, "cosine_rows");
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a) || t->needs_grad(b);
    const int ia = a.index(), ib = b.index();
    const Mat& av = a.value();
    const Mat& bv = b.value();
    Mat out(av.rows(), 1);
    for (Eigen::Index r = 0; r < av.rows(); ++r) {
        const double na = av.row(r).norm(), nb = bv.row(r).norm();
        out(r, 0) = (na > 0.0 && nb > 0.0) ? av.row(r).dot(bv.row(r)) / (na * nb) : 0.0;
    }
    return t->make(std::move(out), ng, [t, ia, ib](const Mat& g) {
        const Mat& av = t->val(ia);
        const Mat& bv = t->val(ib);
        Mat da = Mat::Zero(av.rows(), av.cols());
        Mat db = Mat::Zero(bv.rows(), bv.cols());
        for (Eigen::Index r = 0; r < av.rows(); ++r) {
            const double na = av.row(r).norm(), nb = bv.row(r).norm();
            if (na <= 0.0 || nb <= 0.0) continue;
            const double dot = av.row(r).dot(bv.row(r));
            const double cos = dot / (na * nb);
            da.row(r) = g(r, 0) * (bv.row(r) / (na * nb) - cos * av.row(r) / (na * na));
            db.row(r) = g(r, 0) * (av.row(r) / (na * nb) - cos * bv.row(r) / (nb * nb));
        }
        t->accumulate(ia, da);
        t->accumulate(ib, db);
    });
}

Var dropout(Var a, double p, Rng& rng, bool training) {
    if (!training || p <= 0.0) return a;
    if (p >= 1.0) throw NumericError("dropout: p must be < 1");
    Tape* t = a.tape();
    const bool ng = t->needs_grad(a);
    const int ia = a.index();
    const double keep = 1.0 - p;
    Mat mask(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < mask.size(); ++i)
        mask(i) = rng.uniform01() < keep ? 1.0 / keep : 0.0;
    return t->make(a.value().cwiseProduct(mask), ng, [t, ia, mask](const Mat& g) {
        t->accumulate(ia, g.cwiseProduct(mask));
    });
}

} // namespace mrdf::ad
