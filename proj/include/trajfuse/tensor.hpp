#pragma once

#include <Eigen/Dense>

#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

#include "trajfuse/errors.hpp"

namespace trajfuse {

using Array = Eigen::ArrayXd;

class Tape;

/// Dense row-major tensor of 64-bit reals. A tensor is a plain value; it
/// additionally carries a node id when it was produced on (or watched by) a
/// live Tape, which is what makes operations on it recordable.
struct Tensor {
    std::vector<int> shape;
    Array data;
    bool requires_grad = false;
    int node = -1;  // id on `tape`; -1 means constant
    std::weak_ptr<Tape> tape;

    Tensor() = default;
    Tensor(std::vector<int> shape_in, Array data_in);

    int numel() const { return static_cast<int>(data.size()); }
    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
    bool on_tape() const { return node >= 0; }

    double operator[](int i) const { return data[i]; }
    double& operator[](int i) { return data[i]; }

    // Indexed access for rank-3 [C,H,W] tensors.
    double at3(int c, int h, int w) const;
    double& at3(int c, int h, int w);
};

long long shape_numel(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);
bool same_shape(const Tensor& a, const Tensor& b);

Tensor zeros(std::vector<int> shape);
Tensor constant(std::vector<int> shape, double value);
Tensor scalar_tensor(double value);
Tensor from_values(std::vector<int> shape, std::initializer_list<double> values);
Tensor from_array(std::vector<int> shape, Array values);

/// Throws NumericError if any entry of `t` is NaN or infinite.
void check_finite(const Tensor& t, const char* op);

using BackwardFn = std::function<void(const Array& out_grad, Tape& tape)>;

/// Reverse-mode tape, rebuilt per forward pass. Nodes are appended as
/// operations execute, so parents always precede children and a reverse
/// index sweep is a valid topological order for gradient accumulation.
class Tape : public std::enable_shared_from_this<Tape> {
  public:
    static std::shared_ptr<Tape> create();

    /// Registers `t` as a leaf on this tape so subsequent operations record
    /// and `grad(t)` is defined after backward(). Re-watching is a no-op.
    void watch(Tensor& t);

    /// Appends a node; returns its id. `backward` receives the node's output
    /// gradient and accumulates into parents via accumulate().
    int record(const char* kind, std::vector<int> parents, int out_size, BackwardFn backward);

    /// Reverse-topological accumulation seeded at `loss` (must be a scalar
    /// produced on this tape). Leaves not reaching the loss get zero.
    void backward(const Tensor& loss);

    /// Gradient of the last backward() loss w.r.t. `t`.
    Array grad(const Tensor& t) const;

    void accumulate(int node_id, const Array& g);

    std::size_t node_count() const { return nodes_.size(); }
    const char* node_kind(int id) const { return nodes_[static_cast<std::size_t>(id)].kind; }
    const std::vector<int>& node_parents(int id) const {
        return nodes_[static_cast<std::size_t>(id)].parents;
    }

  private:
    Tape() = default;

    struct Node {
        const char* kind;
        std::vector<int> parents;
        int out_size;
        BackwardFn backward;  // null for leaves
    };

    std::vector<Node> nodes_;
    std::vector<Array> grads_;  // parallel to nodes_; size 0 = not reached
    bool ran_backward_ = false;
};

/// The single live tape shared by all on-tape inputs, or null when every
/// input is constant. Mixing tensors from two live tapes is an error.
std::shared_ptr<Tape> common_tape(std::initializer_list<const Tensor*> inputs);

/// Binds `out` to `tape` as the node returned by `record`, marking it
/// gradient-bearing.
void bind_output(Tensor& out, const std::shared_ptr<Tape>& tape, int node_id);

}  // namespace trajfuse
