#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gaal/tensor.hpp"

namespace gaal::ad {

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while its tape lives.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Tensor& value() const;
    const Tensor& grad() const;
};

enum class Op : std::uint8_t {
    Leaf,
    Add,
    Sub,
    Mul,
    Scale,
    Square,
    Exp,
    MatMul,
    Affine,
    Relu,
    LeakyRelu,
    Tanh,
    Sigmoid,
    Abs,
    Sum,
    Mean,
    BinaryCrossEntropy,
};

const char* op_name(Op op);

inline constexpr double kDefaultLeakySlope = 0.2;
inline constexpr double kProbabilityClamp = 1e-7;

/// Reverse-mode tape. Nodes are appended in evaluation order, so the node
/// vector is already a topological order and the parent graph is acyclic by
/// construction. A tape belongs to one thread.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var leaf(Tensor value, bool requires_grad = true);
    Var constant(Tensor value) { return leaf(std::move(value), false); }

    const Tensor& value(Var v) const;
    const Tensor& grad(Var v) const;
    Op op(Var v) const;
    bool requires_grad(Var v) const;
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Zeroes every gradient, seeds d(loss)/d(loss) = 1 and propagates.
    /// Throws ContractError when `loss` is not a scalar.
    void backward(Var loss);

private:
    friend Var record(Tape&, Op, Tensor, std::initializer_list<Var>, double, Tensor);

    struct Node {
        Op op = Op::Leaf;
        std::size_t parents[3] = {0, 0, 0};
        std::uint8_t parent_count = 0;
        bool requires_grad = false;
        double param = 0.0;
        Tensor value;
        Tensor aux;   // op-specific constant (bce targets)
        Tensor grad;
    };

    void propagate(std::size_t id);
    Node& node(Var v);
    const Node& node(Var v) const;

    std::vector<Node> nodes_;
};

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var square(Var a);
Var exp(Var a);
Var matmul(Var a, Var b);
/// x [in] or [batch,in], weight [out,in], bias [out] -> x * weight^T + bias.
Var affine(Var x, Var weight, Var bias);
Var relu(Var a);
Var leaky_relu(Var a, double slope = kDefaultLeakySlope);
Var tanh(Var a);
Var sigmoid(Var a);
/// Elementwise |a|; the subgradient at 0 is 0.
Var abs(Var a);
Var sum(Var a);
Var mean(Var a);
/// Mean of -[t log p + (1-t) log(1-p)] with p clamped to [1e-7, 1-1e-7].
/// `targets` is either a scalar or matches the shape of `probs`.
Var binary_cross_entropy(Var probs, const Tensor& targets);
Var binary_cross_entropy(Var probs, double target);

}  // namespace gaal::ad
