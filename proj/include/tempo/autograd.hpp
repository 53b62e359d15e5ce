#pragma once

// Reverse-mode gradient engine over a recorded tape of matrix primitives.
//
// A Tape owns every intermediate value of one forward pass. Leaves are either
// constants or Parameters; calling backward() on a 1x1 result accumulates
// d(loss)/d(param) into Parameter::grad for every trainable leaf reached.
// Tapes are single-use and not shared between threads.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tempo/matrix.hpp"

namespace tempo {

enum class ParamGroup {
    position_embedding,
    layer_norm,
    lora,
    attention_core,
    mlp_core,
    heads,
    prompts,
    embed,
    revin_affine,
    local_decomp,
};

inline constexpr ParamGroup kAllParamGroups[] = {
    ParamGroup::position_embedding, ParamGroup::layer_norm,   ParamGroup::lora,
    ParamGroup::attention_core,     ParamGroup::mlp_core,     ParamGroup::heads,
    ParamGroup::prompts,            ParamGroup::embed,        ParamGroup::revin_affine,
    ParamGroup::local_decomp,
};

std::string group_name(ParamGroup g);
ParamGroup parse_group(const std::string& name);

struct Parameter {
    std::string name;
    ParamGroup group = ParamGroup::heads;
    Matrix value;
    Matrix grad;
    bool trainable = true;

    Parameter() = default;
    Parameter(std::string n, ParamGroup g, Matrix v)
        : name(std::move(n)), group(g), value(std::move(v)), grad(value.rows, value.cols) {}

    void zero_grad() { grad = Matrix(value.rows, value.cols); }
};

namespace ag {

class Tape;

/// Handle to a node on a tape.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Matrix& value() const;
    std::size_t rows() const { return value().rows; }
    std::size_t cols() const { return value().cols; }
    double scalar() const { return value()[0]; }
};

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Matrix m);
    Var param(Parameter& p);

    /// Reverse sweep from a 1x1 node. Throws std::invalid_argument otherwise.
    void backward(Var loss);

    const Matrix& value(Var v) const { return nodes_[v.id].value; }
    bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }
    std::size_t size() const { return nodes_.size(); }

    // Used by primitive implementations.
    using Backward = std::function<void(Tape&, std::size_t self)>;
    Var push(Matrix value, bool needs_grad, Backward bw);
    Matrix& grad(std::size_t id);
    const Matrix& grad_of(std::size_t id) const { return nodes_[id].grad; }
    const Matrix& value_of(std::size_t id) const { return nodes_[id].value; }
    bool needs(std::size_t id) const { return nodes_[id].needs_grad; }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool needs_grad = false;
        Parameter* param = nullptr;
        Backward backward;
    };
    std::vector<Node> nodes_;
};

inline const Matrix& Var::value() const { return tape->value(*this); }

// Primitives. Shapes are checked; violations throw std::invalid_argument.
Var matmul(Var a, Var b);                 // (m x k)(k x n)
Var matmul_nt(Var a, Var b);              // (m x k)(n x k)^T
Var add(Var a, Var b);                    // same shape
Var sub(Var a, Var b);                    // same shape
Var mul(Var a, Var b);                    // elementwise, same shape
Var add_row(Var a, Var row);              // a (m x n) + row (1 x n) broadcast
Var scale(Var a, double s);
Var scale_by(Var a, Var s);               // a * s, s is 1x1
Var add_scalar(Var a, Var s);             // a + s, s is 1x1
Var div_by(Var a, Var s);                 // a / s, s is 1x1
Var gelu(Var a);                          // tanh approximation
Var softmax_rows(Var a, bool causal);     // causal masks j > i
Var layer_norm(Var a, Var gamma, Var beta, double eps);  // per row; gamma/beta 1 x n
Var standardize(Var a, double eps);       // whole-matrix (x - mean) / sqrt(var + eps)
Var sum(Var a);                           // 1x1
Var mean(Var a);                          // 1x1
Var mse(Var a, Var b);                    // 1x1 mean squared difference
Var concat_rows(std::span<const Var> parts);
Var slice_rows(Var a, std::size_t begin, std::size_t end);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var reshape(Var a, std::size_t rows, std::size_t cols);
/// out.data[i] = a.data[index[i]]; backward scatters.
Var gather(Var a, std::vector<std::size_t> index, std::size_t rows, std::size_t cols);
/// Multiplies by a fixed 0/1 (or scaled) mask of the same shape.
Var mask(Var a, Matrix m);
Var dropout(Var a, double rate, std::mt19937_64& rng);

} // namespace ag
} // namespace tempo
