#include "gaal/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "gaal/errors.hpp"

namespace gaal::ad {

const char* op_name(Op op) {
    switch (op) {
        case Op::Leaf: return "leaf";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::Scale: return "scale";
        case Op::Square: return "square";
        case Op::Exp: return "exp";
        case Op::MatMul: return "matmul";
        case Op::Affine: return "affine";
        case Op::Relu: return "relu";
        case Op::LeakyRelu: return "leaky_relu";
        case Op::Tanh: return "tanh";
        case Op::Sigmoid: return "sigmoid";
        case Op::Abs: return "abs";
        case Op::Sum: return "sum";
        case Op::Mean: return "mean";
        case Op::BinaryCrossEntropy: return "binary_cross_entropy";
    }
    return "?";
}

const Tensor& Var::value() const { return tape->value(*this); }
const Tensor& Var::grad() const { return tape->grad(*this); }

Tape::Node& Tape::node(Var v) {
    if (v.tape != this || v.id >= nodes_.size()) throw ContractError("variable does not belong to this tape");
    return nodes_[v.id];
}

const Tape::Node& Tape::node(Var v) const {
    if (v.tape != this || v.id >= nodes_.size()) throw ContractError("variable does not belong to this tape");
    return nodes_[v.id];
}

Var Tape::leaf(Tensor value, bool requires_grad) {
    Node n;
    n.op = Op::Leaf;
    n.requires_grad = requires_grad;
    n.grad = Tensor(value.shape(), 0.0);
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var{this, nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const { return node(v).value; }
const Tensor& Tape::grad(Var v) const { return node(v).grad; }
Op Tape::op(Var v) const { return node(v).op; }
bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

Var record(Tape& tape, Op op, Tensor value, std::initializer_list<Var> parents, double param, Tensor aux) {
    Tape::Node n;
    n.op = op;
    n.param = param;
    n.aux = std::move(aux);
    for (Var p : parents) {
        const auto& parent = tape.node(p);
        n.parents[n.parent_count++] = p.id;
        n.requires_grad = n.requires_grad || parent.requires_grad;
    }
    n.grad = Tensor(value.shape(), 0.0);
    n.value = std::move(value);
    tape.nodes_.push_back(std::move(n));
    return Var{&tape, tape.nodes_.size() - 1};
}

void Tape::backward(Var loss) {
    const Node& root = node(loss);
    if (root.value.numel() != 1)
        throw ContractError("backward needs a scalar loss, got shape " + shape_string(root.value.shape()));
    for (auto& n : nodes_) std::fill(n.grad.data().begin(), n.grad.data().end(), 0.0);
    nodes_[loss.id].grad[0] = 1.0;
    for (std::size_t id = loss.id + 1; id-- > 0;) {
        if (nodes_[id].requires_grad && nodes_[id].op != Op::Leaf) propagate(id);
    }
}

void Tape::propagate(std::size_t id) {
    Node& n = nodes_[id];
    const auto g = n.grad.data();
    auto parent = [&](int i) -> Node& { return nodes_[n.parents[i]]; };
    auto accumulate = [](Node& p, std::size_t i, double v) {
        if (p.requires_grad) p.grad[i] += v;
    };

    switch (n.op) {
        case Op::Leaf:
            break;
        case Op::Add: {
            for (std::size_t i = 0; i < g.size(); ++i) {
                accumulate(parent(0), i, g[i]);
                accumulate(parent(1), i, g[i]);
            }
            break;
        }
        case Op::Sub: {
            for (std::size_t i = 0; i < g.size(); ++i) {
                accumulate(parent(0), i, g[i]);
                accumulate(parent(1), i, -g[i]);
            }
            break;
        }
        case Op::Mul: {
            Node& a = parent(0);
            Node& b = parent(1);
            for (std::size_t i = 0; i < g.size(); ++i) {
                accumulate(a, i, g[i] * b.value[i]);
                accumulate(b, i, g[i] * a.value[i]);
            }
            break;
        }
        case Op::Scale: {
            for (std::size_t i = 0; i < g.size(); ++i) accumulate(parent(0), i, g[i] * n.param);
            break;
        }
        case Op::Square: {
            Node& a = parent(0);
            for (std::size_t i = 0; i < g.size(); ++i) accumulate(a, i, 2.0 * a.value[i] * g[i]);
            break;
        }
        case Op::Exp: {
            for (std::size_t i = 0; i < g.size(); ++i) accumulate(parent(0), i, n.value[i] * g[i]);
            break;
        }
        case Op::MatMul: {
            Node& a = parent(0);
            Node& b = parent(1);
            if (a.requires_grad) {
                Tensor ga = gaal::matmul(n.grad, transpose(b.value));
                for (std::size_t i = 0; i < ga.numel(); ++i) a.grad[i] += ga[i];
            }
            if (b.requires_grad) {
                Tensor gb = gaal::matmul(transpose(a.value), n.grad);
                for (std::size_t i = 0; i < gb.numel(); ++i) b.grad[i] += gb[i];
            }
            break;
        }
        case Op::Affine: {
            Node& x = parent(0);
            Node& w = parent(1);
            Node& bias = parent(2);
            const std::size_t in = w.value.dim(1), out = w.value.dim(0);
            const std::size_t batch = n.value.numel() / out;
            for (std::size_t r = 0; r < batch; ++r) {
                const double* gr = &g[r * out];
                const double* xr = &x.value.data()[r * in];
                for (std::size_t o = 0; o < out; ++o) {
                    const double go = gr[o];
                    if (go == 0.0) continue;
                    if (bias.requires_grad) bias.grad[o] += go;
                    const double* wrow = &w.value.data()[o * in];
                    if (x.requires_grad) {
                        double* gx = &x.grad.data()[r * in];
                        for (std::size_t i = 0; i < in; ++i) gx[i] += go * wrow[i];
                    }
                    if (w.requires_grad) {
                        double* gw = &w.grad.data()[o * in];
                        for (std::size_t i = 0; i < in; ++i) gw[i] += go * xr[i];
                    }
                }
            }
            break;
        }
        case Op::Relu: {
            Node& a = parent(0);
            for (std::size_t i = 0; i < g.size(); ++i) accumulate(a, i, a.value[i] > 0.0 ? g[i] : 0.0);
            break;
        }
        case Op::LeakyRelu: {
            Node& a = parent(0);
            for (std::size_t i = 0; i < g.size(); ++i) accumulate(a, i, a.value[i] > 0.0 ? g[i] : n.param * g[i]);
            break;
        }
        case Op::Tanh: {
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double t = n.value[i];
                accumulate(parent(0), i, (1.0 - t * t) * g[i]);
            }
            break;
        }
        case Op::Sigmoid: {
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double s = n.value[i];
                accumulate(parent(0), i, s * (1.0 - s) * g[i]);
            }
            break;
        }
        case Op::Abs: {
            Node& a = parent(0);
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double v = a.value[i];
                const double sign = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
                accumulate(a, i, sign * g[i]);
            }
            break;
        }
        case Op::Sum: {
            Node& a = parent(0);
            for (std::size_t i = 0; i < a.value.numel(); ++i) accumulate(a, i, g[0]);
            break;
        }
        case Op::Mean: {
            Node& a = parent(0);
            const double share = g[0] / static_cast<double>(a.value.numel());
            for (std::size_t i = 0; i < a.value.numel(); ++i) accumulate(a, i, share);
            break;
        }
        case Op::BinaryCrossEntropy: {
            Node& p = parent(0);
            const std::size_t count = p.value.numel();
            const bool broadcast = n.aux.numel() == 1;
            const double share = g[0] / static_cast<double>(count);
            for (std::size_t i = 0; i < count; ++i) {
                const double raw = p.value[i];
                if (raw < kProbabilityClamp || raw > 1.0 - kProbabilityClamp) continue;
                const double t = broadcast ? n.aux[0] : n.aux[i];
                accumulate(p, i, share * (-t / raw + (1.0 - t) / (1.0 - raw)));
            }
            break;
        }
    }
}

namespace {

Tape& same_tape(Var a, Var b) {
    if (a.tape == nullptr || a.tape != b.tape) throw ContractError("operands live on different tapes");
    return *a.tape;
}

Tensor map_unary(const Tensor& in, auto&& fn) {
    Tensor out(in.shape());
    for (std::size_t i = 0; i < in.numel(); ++i) out[i] = fn(in[i]);
    return out;
}

Tensor map_binary(const Tensor& a, const Tensor& b, const char* name, auto&& fn) {
    require_same_shape(a, b, name);
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.numel(); ++i) out[i] = fn(a[i], b[i]);
    return out;
}

}  // namespace

Var add(Var a, Var b) {
    Tape& t = same_tape(a, b);
    return record(t, Op::Add, map_binary(a.value(), b.value(), "add", std::plus<>()), {a, b}, 0.0, {});
}

Var sub(Var a, Var b) {
    Tape& t = same_tape(a, b);
    return record(t, Op::Sub, map_binary(a.value(), b.value(), "sub", std::minus<>()), {a, b}, 0.0, {});
}

Var mul(Var a, Var b) {
    Tape& t = same_tape(a, b);
    return record(t, Op::Mul, map_binary(a.value(), b.value(), "mul", std::multiplies<>()), {a, b}, 0.0, {});
}

Var scale(Var a, double factor) {
    return record(*a.tape, Op::Scale, map_unary(a.value(), [factor](double v) { return v * factor; }), {a}, factor,
                  {});
}

Var square(Var a) {
    return record(*a.tape, Op::Square, map_unary(a.value(), [](double v) { return v * v; }), {a}, 0.0, {});
}

Var exp(Var a) {
    return record(*a.tape, Op::Exp, map_unary(a.value(), [](double v) { return std::exp(v); }), {a}, 0.0, {});
}

Var matmul(Var a, Var b) {
    Tape& t = same_tape(a, b);
    return record(t, Op::MatMul, gaal::matmul(a.value(), b.value()), {a, b}, 0.0, {});
}

Var affine(Var x, Var weight, Var bias) {
    Tape& t = same_tape(x, weight);
    same_tape(x, bias);
    const Tensor& xv = x.value();
    const Tensor& wv = weight.value();
    const Tensor& bv = bias.value();
    if (wv.rank() != 2 || bv.rank() != 1 || bv.dim(0) != wv.dim(0))
        throw DimensionError("affine parameter mismatch: weight " + shape_string(wv.shape()) + ", bias " +
                             shape_string(bv.shape()));
    if (xv.rank() < 1 || xv.rank() > 2 || xv.cols() != wv.dim(1))
        throw DimensionError("affine input mismatch: x " + shape_string(xv.shape()) + " against weight " +
                             shape_string(wv.shape()));
    const std::size_t in = wv.dim(1), out = wv.dim(0), batch = xv.rows();
    Tensor y(xv.rank() == 1 ? Shape{out} : Shape{batch, out});
    for (std::size_t r = 0; r < batch; ++r) {
        const double* xr = &xv.data()[r * in];
        for (std::size_t o = 0; o < out; ++o) {
            const double* wrow = &wv.data()[o * in];
            double acc = bv[o];
            for (std::size_t i = 0; i < in; ++i) acc += wrow[i] * xr[i];
            y[r * out + o] = acc;
        }
    }
    return record(t, Op::Affine, std::move(y), {x, weight, bias}, 0.0, {});
}

Var relu(Var a) {
    return record(*a.tape, Op::Relu, map_unary(a.value(), [](double v) { return v > 0.0 ? v : 0.0; }), {a}, 0.0, {});
}

Var leaky_relu(Var a, double slope) {
    return record(*a.tape, Op::LeakyRelu,
                  map_unary(a.value(), [slope](double v) { return v > 0.0 ? v : slope * v; }), {a}, slope, {});
}

Var tanh(Var a) {
    return record(*a.tape, Op::Tanh, map_unary(a.value(), [](double v) { return std::tanh(v); }), {a}, 0.0, {});
}

Var sigmoid(Var a) {
    auto logistic = [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
    };
    return record(*a.tape, Op::Sigmoid, map_unary(a.value(), logistic), {a}, 0.0, {});
}

Var abs(Var a) {
    return record(*a.tape, Op::Abs, map_unary(a.value(), [](double v) { return std::fabs(v); }), {a}, 0.0, {});
}

Var sum(Var a) {
    double total = 0.0;
    for (double v : a.value().data()) total += v;
    return record(*a.tape, Op::Sum, Tensor::scalar(total), {a}, 0.0, {});
}

Var mean(Var a) {
    double total = 0.0;
    for (double v : a.value().data()) total += v;
    return record(*a.tape, Op::Mean, Tensor::scalar(total / static_cast<double>(a.value().numel())), {a}, 0.0, {});
}

Var binary_cross_entropy(Var probs, const Tensor& targets) {
    const Tensor& p = probs.value();
    const bool broadcast = targets.numel() == 1;
    if (!broadcast && targets.numel() != p.numel())
        throw DimensionError("binary_cross_entropy target mismatch: probs " + shape_string(p.shape()) +
                             ", targets " + shape_string(targets.shape()));
    double total = 0.0;
    for (std::size_t i = 0; i < p.numel(); ++i) {
        const double t = broadcast ? targets[0] : targets[i];
        const double q = std::clamp(p[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
        total -= t * std::log(q) + (1.0 - t) * std::log(1.0 - q);
    }
    return record(*probs.tape, Op::BinaryCrossEntropy, Tensor::scalar(total / static_cast<double>(p.numel())),
                  {probs}, 0.0, targets);
}

Var binary_cross_entropy(Var probs, double target) { return binary_cross_entropy(probs, Tensor::scalar(target)); }

}  // namespace gaal::ad
