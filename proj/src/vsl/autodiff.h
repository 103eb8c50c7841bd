#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "vsl/tensor.h"

namespace vsl {
namespace ad {

enum class Primitive {
    matmul,
    add,
    mul,
    concat,
    sigmoid,
    tanh,
    relu,
    exp,
    log,
    softplus,
    softmax,
    sum,
    mean,
    slice,
    scale,
    log_softmax,
    cross_entropy,
};

const char* primitive_name(Primitive p);

class Tape;

// Handle to a node on a tape. Cheap to copy; invalidated when the tape dies.
struct Value {
    Tape* tape = nullptr;
    int id = -1;
};

// Extra arguments for primitives that are not pure tensor functions.
struct PrimitiveArgs {
    int start = 0;   // slice
    int len = 0;     // slice
    double factor = 1.0;  // scale
    int target = -1;      // cross_entropy
};

// Records a forward computation and replays it in reverse for gradients.
// Leaf parameters are bound by reference; backward accumulates (+=) into
// their grad buffers, so shared parameters collect contributions from every
// use and every backward call until an explicit zero_grad.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // constant input, never receives gradient
    Value input(Tensor t);
    Value constant(std::vector<double> v);
    Value constant_like(double x, int n);

    // leaf bound to a persistent parameter tensor
    Value param(Tensor& t);

    // embedding-style gather: selects one row of a 2-D table, produces a
    // vector; backward scatter-adds into the table rows
    Value lookup_row(Tensor& table, int row);

    Value apply(Primitive p, const std::vector<Value>& inputs, const PrimitiveArgs& args = {});

    void backward(Value loss);

    const Tensor& value(Value v) const;
    double scalar(Value v) const { return value(v).item(); }
    // adjoint of a node after backward; zeros if never touched
    std::vector<double> adjoint(Value v) const;
    int size() const { return static_cast<int>(nodes_.size()); }
    bool empty() const { return nodes_.empty(); }

private:
    struct Node {
        Tensor out;                // owned result; unused for bound leaves
        Tensor* bound = nullptr;   // leaf parameter binding
        std::vector<int> inputs;
        std::function<void(Tape&, int)> back;
        std::vector<double> adj;   // sized lazily during backward
        bool needs_grad = false;
    };
    std::vector<Node> nodes_;
    std::vector<Tensor*> touched_params_;
    std::unordered_map<Tensor*, int> param_cache_;

    int add_node(Node n);
    std::vector<double>& adj(int id);
    void accumulate(int id, const std::vector<double>& contribution);

    friend struct OpAccess;
};

// --- primitive surface ------------------------------------------------

Value matmul(Value a, Value b);
// element-wise same-shape add, or matrix + vector bias over the last axis
Value add(Value a, Value b);
Value sub(Value a, Value b);
Value mul(Value a, Value b);
Value scale(Value a, double factor);
Value concat(const std::vector<Value>& parts);
Value slice(Value a, int start, int len);
Value sigmoid(Value a);
Value tanh(Value a);
Value relu(Value a);
Value exp(Value a);
Value log(Value a);
Value softplus(Value a);
Value softmax(Value a);
Value log_softmax(Value a);
Value sum(Value a);
Value mean(Value a);
// fused stable -log softmax(logits)[target], scalar output
Value cross_entropy(Value logits, int target);

// Max over coordinates of |analytic - central difference| / max(1, |analytic|)
// for a scalar-valued function of one tensor. f receives a fresh tape and the
// point as a tape value; it must be deterministic.
double gradient_check(const std::function<Value(Tape&, Value)>& f, const Tensor& point, double epsilon);

}  // namespace ad
}  // namespace vsl
