#include "tempo/autograd.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "tempo/kernels/kernels.hpp"

namespace tempo {

std::string group_name(ParamGroup g) {
    switch (g) {
    case ParamGroup::position_embedding: return "position_embedding";
    case ParamGroup::layer_norm: return "layer_norm";
    case ParamGroup::lora: return "lora";
    case ParamGroup::attention_core: return "attention_core";
    case ParamGroup::mlp_core: return "mlp_core";
    case ParamGroup::heads: return "heads";
    case ParamGroup::prompts: return "prompts";
    case ParamGroup::embed: return "embed";
    case ParamGroup::revin_affine: return "revin_affine";
    case ParamGroup::local_decomp: return "local_decomp";
    }
    return "unknown";
}

ParamGroup parse_group(const std::string& name) {
    for (ParamGroup g : kAllParamGroups)
        if (group_name(g) == name) return g;
    throw std::invalid_argument("unknown parameter group '" + name + "'");
}

namespace ag {
namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

bool any_needs(const Tape& t, std::initializer_list<Var> vs) {
    for (Var v : vs)
        if (t.needs(v.id)) return true;
    return false;
}

void add_into(Matrix& dst, const Matrix& src) {
    kernels::active().axpy(1.0, src.data.data(), dst.data.data(), src.size());
}

} // namespace

Var Tape::push(Matrix value, bool needs_grad, Backward bw) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    if (needs_grad) n.backward = std::move(bw);
    nodes_.push_back(std::move(n));
    return Var{this, nodes_.size() - 1};
}

Var Tape::constant(Matrix m) { return push(std::move(m), false, nullptr); }

Var Tape::param(Parameter& p) {
    Var v = push(p.value, p.trainable, nullptr);
    nodes_[v.id].param = &p;
    return v;
}

Matrix& Tape::grad(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.size() != n.value.size()) n.grad = Matrix(n.value.rows, n.value.cols);
    return n.grad;
}

void Tape::backward(Var loss) {
    if (loss.tape != this) throw std::invalid_argument("backward: variable belongs to another tape");
    if (nodes_[loss.id].value.size() != 1) throw std::invalid_argument("backward: loss must be scalar");
    if (!nodes_[loss.id].needs_grad) return;
    grad(loss.id)[0] = 1.0;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.needs_grad || n.grad.empty()) continue;
        if (n.backward) n.backward(*this, i);
        if (n.param) add_into(n.param->grad, n.grad);
    }
}

Var matmul(Var a, Var b) {
    Tape& t = *a.tape;
    const Matrix& A = a.value();
    const Matrix& B = b.value();
    require(A.cols == B.rows, "matmul: inner dimensions differ");
    Matrix C(A.rows, B.cols);
    kernels::active().gemm_nn(A.data.data(), B.data.data(), C.data.data(), A.rows, A.cols, B.cols);
    return t.push(std::move(C), any_needs(t, {a, b}), [a, b](Tape& t, std::size_t self) {
        const Matrix& G = t.grad_of(self);
        const Matrix& A = t.value_of(a.id);
        const Matrix& B = t.value_of(b.id);
        if (t.needs(a.id))  // dA = G B^T
            kernels::active().gemm_nt(G.data.data(), B.data.data(), t.grad(a.id).data.data(), A.rows,
                                      B.cols, A.cols);
        if (t.needs(b.id))  // dB = A^T G
            kernels::active().gemm_tn(A.data.data(), G.data.data(), t.grad(b.id).data.data(), B.rows,
                                      A.rows, B.cols);
    });
}

Var matmul_nt(Var a, Var b) {
    Tape& t = *a.tape;
    const Matrix& A = a.value();
    const Matrix& B = b.value();
    require(A.cols == B.cols, "matmul_nt: inner dimensions differ");
    Matrix C(A.rows, B.rows);
    kernels::active().gemm_nt(A.data.data(), B.data.data(), C.data.data(), A.rows, A.cols, B.rows);
    return t.push(std::move(C), any_needs(t, {a, b}), [a, b](Tape& t, std::size_t self) {
        const Matrix& G = t.grad_of(self);
        const Matrix& A = t.value_of(a.id);
        const Matrix& B = t.value_of(b.id);
        if (t.needs(a.id))  // dA = G B
            kernels::active().gemm_nn(G.data.data(), B.data.data(), t.grad(a.id).data.data(), A.rows,
                                      B.rows, A.cols);
        if (t.needs(b.id))  // dB = G^T A
            kernels::active().gemm_tn(G.data.data(), A.data.data(), t.grad(b.id).data.data(), B.rows,
                                      A.rows, A.cols);
    });
}

Var add(Var a, Var b) {
    Tape& t = *a.tape;
    require(a.value().same_shape(b.value()), "add: shape mismatch");
    Matrix C = a.value();
    add_into(C, b.value());
    return t.push(std::move(C), any_needs(t, {a, b}), [a, b](Tape& t, std::size_t self) {
        const Matrix& G = t.grad_of(self);
        if (t.needs(a.id)) add_into(t.grad(a.id), G);
        if (t.needs(b.id)) add_into(t.grad(b.id), G);
    });
}

Var sub(Var a, Var b) {
    Tape& t = *a.tape;
    require(a.value().same_shape(b.value()), "sub: shape mismatch");
    Matrix C = a.value();
    for (std::size_t i = 0; i < C.size(); ++i) C[i] -= b.value()[i];
    return t.push(std::move(C), any_needs(t, {a, b}), [a, b](Tape& t, std::size_t self) {
        const Matrix& G = t.grad_of(self);
        if (t.needs(a.id)) add_into(t.grad(a.id), G);
        if (t.needs(b.id)) {
            Matrix& gb = t.grad(b.id);
            for (std::size_t i = 0; i < G.size(); ++i) gb[i] -= G[i];
        }
    });
}

Var mul(Var a, Var b) {
    Tape& t = *a.tape;
    require(a.value().same_shape(b.value()), "mul: shape mismatch");
    Matrix C = a.value();
    for (std::size_t i = 0; i < C.size(); ++i) C[i] *= b.value()[i];
    return t.push(std::move(C), any_needs(t, {a, b}), [a, b](Tape& t, std::size_t self) {
        const Matrix& G = t.grad_of(self);
        const Matrix& A = t.value_of(a.id);
        const Matrix& B = t.value_of(b.id);
        if (t.needs(a.id)) {
            Matrix& ga = t.grad(a.id);
            for (std::size_t i = 0; i < G.size(); ++i) ga[i] += G[i] * B[i];
        }
        if (t.needs(b.id)) {
            Matrix& gb = t.grad(b.id);
            for (std::size_t i = 0; i < G.size(); ++i) gb[i] += G[i] * A[i];
        }
    });
}

Var add_row(Var a, Var row) {
    Tape& t = *a.tape;
    const Matrix& A = a.value();
    const Matrix& R = row.value();
    require(R.rows == 1 && R.cols == A.cols, "add_row: row shape mismatch");
    Matrix C = A;
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < A.cols; ++j) C(i, j) += R[j];
    return t.push(std::move(C), any_needs(t, {a, row}), [a, row](Tape& t, std::size_t self) {
        const Matrix& G = t.grad_of(self);
        if (t.needs(a.id)) add_into(t.grad(a.id), G);
        if (t.needs(row.id)) {
            Matrix& gr = t.grad(row.id);
            for (std::size_t i = 0; i < G.rows; ++i)
                for (std::size_t j = 0; j < G.cols; ++j) gr[j] += G(i, j);
        }
    });
}

Var scale(Var a, double s) {
    Tape& t = *a.tape;
    Matrix C = a.value();
    for (double& v : C.data) v *= s;
    return t.push(std::move(C), t.needs(a.id), [a, s](Tape& t, std::size_t self) {
        kernels::active().axpy(s, t.grad_of(self).data.data(), t.grad(a.id).data.data(),
                               t.grad_of(self).size());
    });
}

Var scale_by(Var a, Var s) {
    Tape& t = *a.tape;
    require(s.value().size() == 1, "scale_by: scale must be 1x1");
    const double sv = s.value()[0];
    Matrix C = a.value();
    for (double& v : C.data) v *= sv;
    return t.push(std::move(C), any_needs(t, {a, s}), [a, s](Tape& t, std::size_t self) {
        const Matrix& G = t.grad_of(self);
        const double sv = t.value_of(s.id)[0];
        if (t.needs(a.id)) kernels::active().axpy(sv, G.data.data(), t.grad(a.id).data.data(), G.size());
        if (t.needs(s.id)) {
            const Matrix& A = t.value_of(a.id);
            t.grad(s.id)[0] += kernels::active().dot(G.data.data(), A.data.data(), G.size());
        }
    });
}

Var add_scalar(Var a, Var s) {
    Tape& t = *a.tape;
    require(s.value().size() == 1, "add_scalar: scalar must be 1x1");
    const double sv = s.value()[0];
    Matrix C = a.value();
    for (double& v : C.data) v += sv;
    return t.push(std::move(C), any_needs(t, {a, s}), [a, s](Tape& t, std::size_t self) {
        const Matrix& G = t.grad_of(self);
        if (t.needs(a.id)) add_into(t.grad(a.id), G);
        if (t.needs(s.id)) {
            double acc = 0.0;
            for (double g : G.data) acc += g;
            t.grad(s.id)[0] += acc;
        }
    });
}

Var div_by(Var a, Var s) {
    Tape& t = *a.tape;
    require(s.value().size() == 1, "div_by: divisor must be 1x1");
    const double sv = s.value()[0];
    Matrix C = a.value();
    for (double& v : C.data) v /= sv;
    return t.push(std::move(C), any_needs(t, {a, s}), [a, s](Tape& t, std::size_t self) {
        const Matrix& G = t.grad_of(self);
        const double sv = t.value_of(s.id)[0];
        if (t.needs(a.id)) {
            Matrix& ga = t.grad(a.id);
            for (std::size_t i = 0; i < G.size(); ++i) ga[i] += G[i] / sv;
        }
        if (t.needs(s.id)) {
            // d(a/s)/ds = -(a/s)/s
            const Matrix& Y = t.value_of(self);
            t.grad(s.id)[0] -= kernels::active().dot(G.data.data(), Y.data.data(), G.size()) / sv;
        }
    });
}

Var gelu(Var a) {
    Tape& t = *a.tape;
    constexpr double c = 0.7978845608028654;  // sqrt(2/pi)
    Matrix C = a.value();
    for (double& x : C.data) x = 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
    return t.push(std::move(C), t.needs(a.id), [a](Tape& t, std::size_t self) {
        const Matrix& G = t.grad_of(self);
        const Matrix& X = t.value_of(a.id);
        Matrix& ga = t.grad(a.id);
        for (std::size_t i = 0; i < X.size(); ++i) {
            const double x = X[i];
            const double u = c * (x + 0.044715 * x * x * x);
            const double th = std::tanh(u);
            const double du = c * (1.0 + 3.0 * 0.044715 * x * x);
            ga[i] += G[i] * (0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * du);
        }
    });
}

Var softmax_rows(Var a, bool causal) {
    Tape& t = *a.tape;
    const Matrix& A = a.value();
    if (causal) require(A.rows <= A.cols, "softmax_rows: causal mask needs rows <= cols");
    Matrix P(A.rows, A.cols);
    for (std::size_t i = 0; i < A.rows; ++i) {
        const std::size_t width = causal ? i + 1 : A.cols;
        double mx = A(i, 0);
        for (std::size_t j = 1; j < width; ++j) mx = std::max(mx, A(i, j));
        double z = 0.0;
        for (std::size_t j = 0; j < width; ++j) z += (P(i, j) = std::exp(A(i, j) - mx));
        for (std::size_t j = 0; j < width; ++j) P(i, j) /= z;
    }
    return t.push(std::move(P), t.needs(a.id), [a](Tape& t, std::size_t self) {
        const Matrix& G = t.grad_of(self);
        const Matrix& P = t.value_of(self);
        Matrix& ga = t.grad(a.id);
        for (std::size_t i = 0; i < P.rows; ++i) {
            const double d = kernels::active().dot(G.data.data() + i * G.cols, P.data.data() + i * P.cols, P.cols);
            for (std::size_t j = 0; j < P.cols; ++j) ga(i, j) += P(i, j) * (G(i, j) - d);
        }
    });
}

Var layer_norm(Var a, Var gamma, Var beta, double eps) {
    Tape& t = *a.tape;
    const Matrix& A = a.value();
    const std::size_t n = A.cols;
    require(gamma.value().rows == 1 && gamma.value().cols == n, "layer_norm: gamma shape");
    require(beta.value().rows == 1 && beta.value().cols == n, "layer_norm: beta shape");
    Matrix Y(A.rows, n);
    // xhat and 1/sigma per row, kept for the backward pass
    auto xhat = std::make_shared<Matrix>(A.rows, n);
    auto inv = std::make_shared<std::vector<double>>(A.rows);
    for (std::size_t i = 0; i < A.rows; ++i) {
        double mu = 0.0;
        for (std::size_t j = 0; j < n; ++j) mu += A(i, j);
        mu /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j) var += (A(i, j) - mu) * (A(i, j) - mu);
        var /= static_cast<double>(n);
        const double is = 1.0 / std::sqrt(var + eps);
        (*inv)[i] = is;
        for (std::size_t j = 0; j < n; ++j) {
            const double xh = (A(i, j) - mu) * is;
            (*xhat)(i, j) = xh;
            Y(i, j) = gamma.value()[j] * xh + beta.value()[j];
        }
    }
    return t.push(std::move(Y), any_needs(t, {a, gamma, beta}),
                  [a, gamma, beta, xhat, inv](Tape& t, std::size_t self) {
                      const Matrix& G = t.grad_of(self);
                      const Matrix& gm = t.value_of(gamma.id);
                      const std::size_t n = G.cols;
                      const double dn = static_cast<double>(n);
                      if (t.needs(gamma.id) || t.needs(beta.id)) {
                          for (std::size_t i = 0; i < G.rows; ++i)
                              for (std::size_t j = 0; j < n; ++j) {
                                  if (t.needs(gamma.id)) t.grad(gamma.id)[j] += G(i, j) * (*xhat)(i, j);
                                  if (t.needs(beta.id)) t.grad(beta.id)[j] += G(i, j);
                              }
                      }
                      if (t.needs(a.id)) {
                          Matrix& ga = t.grad(a.id);
                          std::vector<double> gh(n);
                          for (std::size_t i = 0; i < G.rows; ++i) {
                              double m1 = 0.0, m2 = 0.0;
                              for (std::size_t j = 0; j < n; ++j) {
                                  gh[j] = G(i, j) * gm[j];
                                  m1 += gh[j];
                                  m2 += gh[j] * (*xhat)(i, j);
                              }
                              m1 /= dn;
                              m2 /= dn;
                              for (std::size_t j = 0; j < n; ++j)
                                  ga(i, j) += (*inv)[i] * (gh[j] - m1 - (*xhat)(i, j) * m2);
                          }
                      }
                  });
}

Var standardize(Var a, double eps) {
    Tape& t = *a.tape;
    const Matrix& A = a.value();
    require(!A.empty(), "standardize: empty input");
    const double n = static_cast<double>(A.size());
    double mu = 0.0;
    for (double v : A.data) mu += v;
    mu /= n;
    double var = 0.0;
    for (double v : A.data) var += (v - mu) * (v - mu);
    var /= n;
    const double is = 1.0 / std::sqrt(var + eps);
    Matrix Y(A.rows, A.cols);
    for (std::size_t i = 0; i < A.size(); ++i) Y[i] = (A[i] - mu) * is;
    return t.push(std::move(Y), t.needs(a.id), [a, is](Tape& t, std::size_t self) {
        const Matrix& G = t.grad_of(self);
        const Matrix& Y = t.value_of(self);
        const double n = static_cast<double>(G.size());
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < G.size(); ++i) {
            m1 += G[i];
            m2 += G[i] * Y[i];
        }
        m1 /= n;
        m2 /= n;
        Matrix& ga = t.grad(a.id);
        for (std::size_t i = 0; i < G.size(); ++i) ga[i] += is * (G[i] - m1 - Y[i] * m2);
    });
}

Var sum(Var a) {
    Tape& t = *a.tape;
    double s = 0.0;
    for (double v : a.value().data) s += v;
    return t.push(Matrix(1, 1, s), t.needs(a.id), [a](Tape& t, std::size_t self) {
        const double g = t.grad_of(self)[0];
        for (double& v : t.grad(a.id).data) v += g;
    });
}

Var mean(Var a) {
    require(!a.value().empty(), "mean: empty input");
    return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var mse(Var a, Var b) {
    Tape& t = *a.tape;
    require(a.value().same_shape(b.value()) && !a.value().empty(), "mse: shape mismatch");
    const Matrix& A = a.value();
    const Matrix& B = b.value();
    double s = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) s += (A[i] - B[i]) * (A[i] - B[i]);
    const double n = static_cast<double>(A.size());
    return t.push(Matrix(1, 1, s / n), any_needs(t, {a, b}), [a, b, n](Tape& t, std::size_t self) {
        const double g = t.grad_of(self)[0] * 2.0 / n;
        const Matrix& A = t.value_of(a.id);
        const Matrix& B = t.value_of(b.id);
        if (t.needs(a.id)) {
            Matrix& ga = t.grad(a.id);
            for (std::size_t i = 0; i < A.size(); ++i) ga[i] += g * (A[i] - B[i]);
        }
        if (t.needs(b.id)) {
            Matrix& gb = t.grad(b.id);
            for (std::size_t i = 0; i < A.size(); ++i) gb[i] -= g * (A[i] - B[i]);
        }
    });
}

Var concat_rows(std::span<const Var> parts) {
    require(!parts.empty(), "concat_rows: no inputs");
    Tape& t = *parts[0].tape;
    const std::size_t cols = parts[0].value().cols;
    std::size_t rows = 0;
    bool needs = false;
    for (Var p : parts) {
        require(p.value().cols == cols, "concat_rows: column mismatch");
        rows += p.value().rows;
        needs = needs || t.needs(p.id);
    }
    Matrix C(rows, cols);
    std::size_t off = 0;
    for (Var p : parts) {
        std::copy(p.value().data.begin(), p.value().data.end(), C.data.begin() + off);
        off += p.value().size();
    }
    std::vector<Var> ps(parts.begin(), parts.end());
    return t.push(std::move(C), needs, [ps](Tape& t, std::size_t self) {
        const Matrix& G = t.grad_of(self);
        std::size_t off = 0;
        for (Var p : ps) {
            const std::size_t n = t.value_of(p.id).size();
            if (t.needs(p.id))
                kernels::active().axpy(1.0, G.data.data() + off, t.grad(p.id).data.data(), n);
            off += n;
        }
    });
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
    Tape& t = *a.tape;
    const Matrix& A = a.value();
    require(begin <= end && end <= A.rows, "slice_rows: range out of bounds");
    Matrix C(end - begin, A.cols);
    std::copy(A.data.begin() + begin * A.cols, A.data.begin() + end * A.cols, C.data.begin());
    return t.push(std::move(C), t.needs(a.id), [a, begin](Tape& t, std::size_t self) {
        const Matrix& G = t.grad_of(self);
        Matrix& ga = t.grad(a.id);
        kernels::active().axpy(1.0, G.data.data(), ga.data.data() + begin * ga.cols, G.size());
    });
}

Var concat_cols(std::span<const Var> parts) {
    require(!parts.empty(), "concat_cols: no inputs");
    Tape& t = *parts[0].tape;
    const std::size_t rows = parts[0].value().rows;
    std::size_t cols = 0;
    bool needs = false;
    for (Var p : parts) {
        require(p.value().rows == rows, "concat_cols: row mismatch");
        cols += p.value().cols;
        needs = needs || t.needs(p.id);
    }
    Matrix C(rows, cols);
    std::size_t off = 0;
    for (Var p : parts) {
        const Matrix& P = p.value();
        for (std::size_t i = 0; i < rows; ++i)
            std::copy(P.data.begin() + i * P.cols, P.data.begin() + (i + 1) * P.cols,
                      C.data.begin() + i * cols + off);
        off += P.cols;
    }
    std::vector<Var> ps(parts.begin(), parts.end());
    return t.push(std::move(C), needs, [ps](Tape& t, std::size_t self) {
        const Matrix& G = t.grad_of(self);
        std::size_t off = 0;
        for (Var p : ps) {
            const std::size_t pc = t.value_of(p.id).cols;
            if (t.needs(p.id)) {
                Matrix& gp = t.grad(p.id);
                for (std::size_t i = 0; i < G.rows; ++i)
                    for (std::size_t j = 0; j < pc; ++j) gp(i, j) += G(i, off + j);
            }
            off += pc;
        }
    });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
    Tape& t = *a.tape;
    const Matrix& A = a.value();
    require(begin <= end && end <= A.cols, "slice_cols: range out of bounds");
    const std::size_t w = end - begin;
    Matrix C(A.rows, w);
    for (std::size_t i = 0; i < A.rows; ++i)
        std::copy(A.data.begin() + i * A.cols + begin, A.data.begin() + i * A.cols + end,
                  C.data.begin() + i * w);
    return t.push(std::move(C), t.needs(a.id), [a, begin, w](Tape& t, std::size_t self) {
        const Matrix& G = t.grad_of(self);
        Matrix& ga = t.grad(a.id);
        for (std::size_t i = 0; i < G.rows; ++i)
            for (std::size_t j = 0; j < w; ++j) ga(i, begin + j) += G(i, j);
    });
}

Var reshape(Var a, std::size_t rows, std::size_t cols) {
    Tape& t = *a.tape;
    require(rows * cols == a.value().size(), "reshape: element count mismatch");
    Matrix C(rows, cols, a.value().data);
    return t.push(std::move(C), t.needs(a.id), [a](Tape& t, std::size_t self) {
        add_into(t.grad(a.id), t.grad_of(self));
    });
}

Var gather(Var a, std::vector<std::size_t> index, std::size_t rows, std::size_t cols) {
    Tape& t = *a.tape;
    const Matrix& A = a.value();
    require(index.size() == rows * cols, "gather: index size mismatch");
    Matrix C(rows, cols);
    for (std::size_t i = 0; i < index.size(); ++i) {
        require(index[i] < A.size(), "gather: index out of range");
        C[i] = A[index[i]];
    }
    return t.push(std::move(C), t.needs(a.id),
                  [a, idx = std::move(index)](Tape& t, std::size_t self) {
                      const Matrix& G = t.grad_of(self);
                      Matrix& ga = t.grad(a.id);
                      for (std::size_t i = 0; i < idx.size(); ++i) ga[idx[i]] += G[i];
                  });
}

Var mask(Var a, Matrix m) {
    Tape& t = *a.tape;
    require(a.value().same_shape(m), "mask: shape mismatch");
    Matrix C = a.value();
    for (std::size_t i = 0; i < C.size(); ++i) C[i] *= m[i];
    return t.push(std::move(C), t.needs(a.id), [a, m = std::move(m)](Tape& t, std::size_t self) {
        const Matrix& G = t.grad_of(self);
        Matrix& ga = t.grad(a.id);
        for (std::size_t i = 0; i < G.size(); ++i) ga[i] += G[i] * m[i];
    });
}

Var dropout(Var a, double rate, std::mt19937_64& rng) {
    if (rate <= 0.0) return a;
    require(rate < 1.0, "dropout: rate must be < 1");
    Matrix m(a.rows(), a.cols());
    std::bernoulli_distribution keep(1.0 - rate);
    const double s = 1.0 / (1.0 - rate);
    for (double& v : m.data) v = keep(rng) ? s : 0.0;
    return mask(a, std::move(m));
}

} // namespace ag
} // namespace tempo
