#include "trajfuse/tensor.hpp"

#include <sstream>
#include <utility>

namespace trajfuse {

long long shape_numel(const std::vector<int>& shape) {
    long long n = 1;
    for (int d : shape) n *= d;
    return n;
}

std::string shape_str(const std::vector<int>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

bool same_shape(const Tensor& a, const Tensor& b) {
    return a.shape == b.shape;
}

Tensor::Tensor(std::vector<int> shape_in, Array data_in)
    : shape(std::move(shape_in)), data(std::move(data_in)) {
    for (int d : shape) {
        if (d <= 0) throw ShapeError("tensor dimension must be positive, got " + shape_str(shape));
    }
    if (shape_numel(shape) != data.size()) {
        throw ShapeError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(shape));
    }
}

double Tensor::at3(int c, int h, int w) const {
    return data[(static_cast<long>(c) * dim(1) + h) * dim(2) + w];
}

double& Tensor::at3(int c, int h, int w) {
    return data[(static_cast<long>(c) * dim(1) + h) * dim(2) + w];
}

Tensor zeros(std::vector<int> shape) {
    const long long n = shape_numel(shape);
    return Tensor(std::move(shape), Array::Zero(n));
}

Tensor constant(std::vector<int> shape, double value) {
    const long long n = shape_numel(shape);
    return Tensor(std::move(shape), Array::Constant(n, value));
}

Tensor scalar_tensor(double value) {
    return constant({1}, value);
}

Tensor from_values(std::vector<int> shape, std::initializer_list<double> values) {
    Array a(static_cast<long>(values.size()));
    long i = 0;
    for (double v : values) a[i++] = v;
    return Tensor(std::move(shape), std::move(a));
}

Tensor from_array(std::vector<int> shape, Array values) {
    return Tensor(std::move(shape), std::move(values));
}

void check_finite(const Tensor& t, const char* op) {
    if (!t.data.allFinite()) {
        throw NumericError(std::string(op) + " produced a non-finite value");
    }
}

std::shared_ptr<Tape> Tape::create() {
    return std::shared_ptr<Tape>(new Tape());
}

void Tape::watch(Tensor& t) {
    if (t.node >= 0 && t.tape.lock().get() == this) return;
    t.node = record("leaf", {}, t.numel(), nullptr);
    t.tape = weak_from_this();
    t.requires_grad = true;
}

int Tape::record(const char* kind, std::vector<int> parents, int out_size, BackwardFn backward) {
    const int id = static_cast<int>(nodes_.size());
    for (int p : parents) {
        if (p < 0 || p >= id) throw ShapeError("tape parent id out of order");
    }
    nodes_.push_back(Node{kind, std::move(parents), out_size, std::move(backward)});
    return id;
}

void Tape::backward(const Tensor& loss) {
    if (loss.numel() != 1) {
        throw ShapeError("backward needs a scalar loss, got shape " + shape_str(loss.shape));
    }
    if (!loss.on_tape() || loss.tape.lock().get() != this) {
        throw ShapeError("backward: loss was not produced on this tape");
    }
    grads_.assign(nodes_.size(), Array());
    ran_backward_ = true;
    accumulate(loss.node, Array::Ones(1));
    for (int i = loss.node; i >= 0; --i) {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        if (n.backward && grads_[static_cast<std::size_t>(i)].size() > 0) {
            n.backward(grads_[static_cast<std::size_t>(i)], *this);
        }
    }
}

Array Tape::grad(const Tensor& t) const {
    if (!t.on_tape() || t.tape.lock().get() != this) {
        throw ShapeError("grad: tensor is not on this tape");
    }
    if (!ran_backward_) throw ShapeError("grad: backward() has not run");
    const Array& g = grads_[static_cast<std::size_t>(t.node)];
    if (g.size() == 0) return Array::Zero(t.numel());
    return g;
}

void Tape::accumulate(int node_id, const Array& g) {
    Array& slot = grads_[static_cast<std::size_t>(node_id)];
    if (slot.size() == 0) {
        slot = g;
    } else {
        slot += g;
    }
}

std::shared_ptr<Tape> common_tape(std::initializer_list<const Tensor*> inputs) {
    std::shared_ptr<Tape> found;
    for (const Tensor* t : inputs) {
        if (!t->on_tape()) continue;
        auto tp = t->tape.lock();
        if (!tp) continue;  // tape is gone; treat as constant
        if (!found) {
            found = tp;
        } else if (found != tp) {
            throw ShapeError("operation mixes tensors from two different tapes");
        }
    }
    return found;
}

void bind_output(Tensor& out, const std::shared_ptr<Tape>& tape, int node_id) {
    out.node = node_id;
    out.tape = tape;
    out.requires_grad = true;
}

}  // namespace trajfuse
