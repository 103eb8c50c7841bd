#include "vsl/autodiff.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace vsl {
namespace ad {

const char* primitive_name(Primitive p) {
    switch (p) {
        case Primitive::matmul: return "matmul";
        case Primitive::add: return "add";
        case Primitive::mul: return "mul";
        case Primitive::concat: return "concat";
        case Primitive::sigmoid: return "sigmoid";
        case Primitive::tanh: return "tanh";
        case Primitive::relu: return "relu";
        case Primitive::exp: return "exp";
        case Primitive::log: return "log";
        case Primitive::softplus: return "softplus";
        case Primitive::softmax: return "softmax";
        case Primitive::sum: return "sum";
        case Primitive::mean: return "mean";
        case Primitive::slice: return "slice";
        case Primitive::scale: return "scale";
        case Primitive::log_softmax: return "log_softmax";
        case Primitive::cross_entropy: return "cross_entropy";
    }
    return "?";
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

void check_finite(const char* op, const Tensor& t) {
    if (!all_finite(t.values)) fail(std::string(op) + ": non-finite result");
}

Tape* owner(const std::vector<Value>& vs) {
    Tape* t = nullptr;
    for (const Value& v : vs) {
        if (v.tape == nullptr) fail("autodiff: use of default-constructed value");
        if (t == nullptr) t = v.tape;
        if (v.tape != t) fail("autodiff: values belong to different tapes");
    }
    if (t == nullptr) fail("autodiff: operation with no inputs");
    return t;
}

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

// log(sum(exp(row))) with max shift
double logsumexp(const double* x, int n) {
    double m = x[0];
    for (int i = 1; i < n; ++i) m = std::max(m, x[i]);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::exp(x[i] - m);
    return m + std::log(s);
}

}  // namespace

struct OpAccess {
    static std::vector<double>& adj(Tape& t, int id) { return t.adj(id); }
    static void accumulate(Tape& t, int id, const std::vector<double>& c) { t.accumulate(id, c); }
    static void touch(Tape& t, Tensor* p) { t.touched_params_.push_back(p); }
    static bool needs_grad(const Tape& t, int id) { return t.nodes_[static_cast<size_t>(id)].needs_grad; }
    static const std::vector<double>& node_adj(const Tape& t, int id) {
        return t.nodes_[static_cast<size_t>(id)].adj;
    }
    static int add_op_node(Tape& t, Tensor out, const std::vector<Value>& inputs,
                           std::function<void(Tape&, int)> back) {
        Tape::Node n;
        n.out = std::move(out);
        bool needs = false;
        for (const Value& v : inputs) {
            n.inputs.push_back(v.id);
            if (needs_grad(t, v.id)) needs = true;
        }
        n.needs_grad = needs;
        n.back = std::move(back);
        return t.add_node(std::move(n));
    }
};

int Tape::add_node(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

std::vector<double>& Tape::adj(int id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.adj.empty()) {
        size_t sz = n.bound ? n.bound->values.size() : n.out.values.size();
        n.adj.assign(sz, 0.0);
    }
    return n.adj;
}

void Tape::accumulate(int id, const std::vector<double>& contribution) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.needs_grad) return;
    std::vector<double>& a = adj(id);
    for (size_t i = 0; i < a.size(); ++i) a[i] += contribution[i];
}

Value Tape::input(Tensor t) {
    Node n;
    n.out = std::move(t);
    return Value{this, add_node(std::move(n))};
}

Value Tape::constant(std::vector<double> v) {
    return input(Tensor({static_cast<int>(v.size())}, std::move(v)));
}

Value Tape::constant_like(double x, int n) { return input(Tensor::full({n}, x)); }

Value Tape::param(Tensor& t) {
    auto it = param_cache_.find(&t);
    if (it != param_cache_.end()) return Value{this, it->second};
    Node n;
    n.bound = &t;
    n.needs_grad = t.requires_grad;
    int id = add_node(std::move(n));
    param_cache_.emplace(&t, id);
    return Value{this, id};
}

Value Tape::lookup_row(Tensor& table, int row) {
    if (table.ndim() != 2) fail("lookup_row: table must be 2-D, got " + shape_str(table.shape));
    if (row < 0 || row >= table.dim(0)) {
        fail("lookup_row: row " + std::to_string(row) + " out of range for table " + shape_str(table.shape));
    }
    int d = table.dim(1);
    Tensor out({d});
    const double* src = table.values.data() + static_cast<size_t>(row) * d;
    std::copy(src, src + d, out.values.begin());
    Node n;
    n.out = std::move(out);
    n.needs_grad = table.requires_grad;
    Tensor* tp = &table;
    n.back = [tp, row, d](Tape& tape, int self) {
        if (!tp->requires_grad) return;
        const std::vector<double>& g = OpAccess::node_adj(tape, self);
        double* dst = tp->grad.data() + static_cast<size_t>(row) * d;
        for (int j = 0; j < d; ++j) dst[j] += g[j];
        OpAccess::touch(tape, tp);
    };
    return Value{this, add_node(std::move(n))};
}

const Tensor& Tape::value(Value v) const {
    const Node& n = nodes_.at(static_cast<size_t>(v.id));
    return n.bound ? *n.bound : n.out;
}

std::vector<double> Tape::adjoint(Value v) const {
    const Node& n = nodes_.at(static_cast<size_t>(v.id));
    if (!n.adj.empty()) return n.adj;
    return std::vector<double>(n.bound ? n.bound->values.size() : n.out.values.size(), 0.0);
}

void Tape::backward(Value loss) {
    if (loss.tape != this) fail("backward: loss from another tape");
    if (nodes_.empty()) fail("backward: empty tape");
    const Tensor& lv = value(loss);
    if (lv.numel() != 1) fail("backward: loss must be scalar, got shape " + shape_str(lv.shape));
    touched_params_.clear();
    adj(loss.id)[0] += 1.0;
    for (int id = loss.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        if (n.adj.empty() || !n.needs_grad) continue;
        if (n.bound) {
            if (n.bound->requires_grad) {
                for (size_t i = 0; i < n.adj.size(); ++i) n.bound->grad[i] += n.adj[i];
                touched_params_.push_back(n.bound);
            }
            continue;
        }
        if (n.back) n.back(*this, id);
    }
    for (Tensor* p : touched_params_) {
        if (!all_finite(p->grad)) fail("backward: non-finite gradient accumulated into a parameter");
    }
    touched_params_.clear();
}

namespace {

struct NodeBuilder {
    Tape& tape;
    std::vector<Value> inputs;

    Value make(Tensor out, std::function<void(Tape&, int)> back) {
        Tape::Node n;
        n.out = std::move(out);
        for (const Value& v : inputs) n.inputs.push_back(v.id);
        bool needs = false;
        for (const Value& v : inputs) {
            if (OpAccess::node(tape, v.id).needs_grad) needs = true;
        }
        n.needs_grad = needs;
        n.back = std::move(back);
        return Value{&tape, OpAccess::add_node(tape, std::move(n))};
    }
};

const Tensor& val(Value v) { return v.tape->value(v); }

// adjoint of the node being differentiated
const std::vector<double>& self_adj(Tape& t, int self) { return OpAccess::node(t, self).adj; }

Value unary_elementwise(const char* name, Value a, const std::function<double(double)>& fwd,
                        const std::function<double(double, double)>& dfdx_times_g) {
    const Tensor& x = val(a);
    Tensor out(x.shape);
    for (int i = 0; i < x.numel(); ++i) out.values[static_cast<size_t>(i)] = fwd(x.values[static_cast<size_t>(i)]);
    check_finite(name, out);
    NodeBuilder b{*a.tape, {a}};
    int in_id = a.id;
    return b.make(std::move(out), [in_id, dfdx_times_g](Tape& t, int self) {
        const std::vector<double>& g = self_adj(t, self);
        const Tensor& x2 = t.value(Value{&t, in_id});
        std::vector<double> c(g.size());
        for (size_t i = 0; i < g.size(); ++i) c[i] = dfdx_times_g(x2.values[i], g[i]);
        OpAccess::accumulate(t, in_id, c);
    });
}

}  // namespace

Value matmul(Value a, Value b) {
    Tape& tape = *owner({a, b});
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    int am = 0, ak = 0, bk = 0, bn = 0;
    bool a_vec = A.ndim() == 1, b_vec = B.ndim() == 1;
    if (A.ndim() == 2) {
        am = A.dim(0);
        ak = A.dim(1);
    } else if (a_vec) {
        am = 1;
        ak = A.dim(0);
    } else {
        fail(std::string("matmul: unsupported rank for ") + shape_str(A.shape));
    }
    if (B.ndim() == 2) {
        bk = B.dim(0);
        bn = B.dim(1);
    } else if (b_vec) {
        bk = B.dim(0);
        bn = 1;
    } else {
        fail(std::string("matmul: unsupported rank for ") + shape_str(B.shape));
    }
    if (ak != bk) fail("matmul: shape mismatch " + shape_str(A.shape) + " vs " + shape_str(B.shape));
    if (a_vec && b_vec) fail("matmul: two vectors given " + shape_str(A.shape) + " vs " + shape_str(B.shape) +
                             "; use mul and sum for a dot product");

    std::vector<int> out_shape;
    if (a_vec) {
        out_shape = {bn};
    } else if (b_vec) {
        out_shape = {am};
    } else {
        out_shape = {am, bn};
    }
    Tensor out(out_shape);
    for (int i = 0; i < am; ++i) {
        for (int j = 0; j < bn; ++j) {
            double s = 0.0;
            for (int k = 0; k < ak; ++k) {
                s += A.values[static_cast<size_t>(i) * ak + k] * B.values[static_cast<size_t>(k) * bn + j];
            }
            out.values[static_cast<size_t>(i) * bn + j] = s;
        }
    }
    check_finite("matmul", out);
    NodeBuilder builder{tape, {a, b}};
    int ida = a.id, idb = b.id;
    return builder.make(std::move(out), [ida, idb, am, ak, bn](Tape& t, int self) {
        const std::vector<double>& g = self_adj(t, self);
        const Tensor& A2 = t.value(Value{&t, ida});
        const Tensor& B2 = t.value(Value{&t, idb});
        std::vector<double> da(A2.values.size(), 0.0);
        std::vector<double> db(B2.values.size(), 0.0);
        for (int i = 0; i < am; ++i) {
            for (int j = 0; j < bn; ++j) {
                double gij = g[static_cast<size_t>(i) * bn + j];
                if (gij == 0.0) continue;
                for (int k = 0; k < ak; ++k) {
                    da[static_cast<size_t>(i) * ak + k] += gij * B2.values[static_cast<size_t>(k) * bn + j];
                    db[static_cast<size_t>(k) * bn + j] += gij * A2.values[static_cast<size_t>(i) * ak + k];
                }
            }
        }
        OpAccess::accumulate(t, ida, da);
        OpAccess::accumulate(t, idb, db);
    });
}

Value add(Value a, Value b) {
    Tape& tape = *owner({a, b});
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    bool bias = A.ndim() == 2 && B.ndim() == 1 && A.dim(1) == B.dim(0);
    if (!bias && A.shape != B.shape) {
        fail("add: shape mismatch " + shape_str(A.shape) + " vs " + shape_str(B.shape));
    }
    Tensor out(A.shape);
    if (bias) {
        int rows = A.dim(0), cols = A.dim(1);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                out.values[static_cast<size_t>(i) * cols + j] =
                    A.values[static_cast<size_t>(i) * cols + j] + B.values[static_cast<size_t>(j)];
            }
        }
    } else {
        for (size_t i = 0; i < out.values.size(); ++i) out.values[i] = A.values[i] + B.values[i];
    }
    check_finite("add", out);
    NodeBuilder builder{tape, {a, b}};
    int ida = a.id, idb = b.id;
    int cols = bias ? A.dim(1) : 0;
    return builder.make(std::move(out), [ida, idb, bias, cols](Tape& t, int self) {
        const std::vector<double>& g = self_adj(t, self);
        OpAccess::accumulate(t, ida, g);
        if (!bias) {
            OpAccess::accumulate(t, idb, g);
            return;
        }
        std::vector<double> db(static_cast<size_t>(cols), 0.0);
        for (size_t i = 0; i < g.size(); ++i) db[i % static_cast<size_t>(cols)] += g[i];
        OpAccess::accumulate(t, idb, db);
    });
}

Value sub(Value a, Value b) { return add(a, scale(b, -1.0)); }

Value mul(Value a, Value b) {
    Tape& tape = *owner({a, b});
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    if (A.shape != B.shape) fail("mul: shape mismatch " + shape_str(A.shape) + " vs " + shape_str(B.shape));
    Tensor out(A.shape);
    for (size_t i = 0; i < out.values.size(); ++i) out.values[i] = A.values[i] * B.values[i];
    check_finite("mul", out);
    NodeBuilder builder{tape, {a, b}};
    int ida = a.id, idb = b.id;
    return builder.make(std::move(out), [ida, idb](Tape& t, int self) {
        const std::vector<double>& g = self_adj(t, self);
        const Tensor& A2 = t.value(Value{&t, ida});
        const Tensor& B2 = t.value(Value{&t, idb});
        std::vector<double> da(g.size()), db(g.size());
        for (size_t i = 0; i < g.size(); ++i) {
            da[i] = g[i] * B2.values[i];
            db[i] = g[i] * A2.values[i];
        }
        OpAccess::accumulate(t, ida, da);
        OpAccess::accumulate(t, idb, db);
    });
}

Value scale(Value a, double factor) {
    const Tensor& A = val(a);
    Tensor out(A.shape);
    for (size_t i = 0; i < out.values.size(); ++i) out.values[i] = A.values[i] * factor;
    check_finite("scale", out);
    NodeBuilder builder{*a.tape, {a}};
    int ida = a.id;
    return builder.make(std::move(out), [ida, factor](Tape& t, int self) {
        const std::vector<double>& g = self_adj(t, self);
        std::vector<double> da(g.size());
        for (size_t i = 0; i < g.size(); ++i) da[i] = g[i] * factor;
        OpAccess::accumulate(t, ida, da);
    });
}

Value concat(const std::vector<Value>& parts) {
    if (parts.empty()) fail("concat: no inputs");
    Tape& tape = *owner(parts);
    const Tensor& first = val(parts[0]);
    int nd = first.ndim();
    if (nd != 1 && nd != 2) fail("concat: unsupported rank for " + shape_str(first.shape));
    int rows = nd == 2 ? first.dim(0) : 1;
    int total_cols = 0;
    std::vector<int> cols;
    for (const Value& p : parts) {
        const Tensor& t = val(p);
        if (t.ndim() != nd || (nd == 2 && t.dim(0) != rows)) {
            fail("concat: shape mismatch " + shape_str(first.shape) + " vs " + shape_str(t.shape));
        }
        cols.push_back(t.dim(nd - 1));
        total_cols += cols.back();
    }
    Tensor out(nd == 2 ? std::vector<int>{rows, total_cols} : std::vector<int>{total_cols});
    int off = 0;
    for (size_t p = 0; p < parts.size(); ++p) {
        const Tensor& t = val(parts[p]);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols[p]; ++j) {
                out.values[static_cast<size_t>(i) * total_cols + off + j] =
                    t.values[static_cast<size_t>(i) * cols[p] + j];
            }
        }
        off += cols[p];
    }
    check_finite("concat", out);
    NodeBuilder builder{tape, parts};
    std::vector<int> ids;
    for (const Value& p : parts) ids.push_back(p.id);
    return builder.make(std::move(out), [ids, cols, rows, total_cols](Tape& t, int self) {
        const std::vector<double>& g = self_adj(t, self);
        int off2 = 0;
        for (size_t p = 0; p < ids.size(); ++p) {
            std::vector<double> dp(static_cast<size_t>(rows) * cols[p]);
            for (int i = 0; i < rows; ++i) {
                for (int j = 0; j < cols[p]; ++j) {
                    dp[static_cast<size_t>(i) * cols[p] + j] = g[static_cast<size_t>(i) * total_cols + off2 + j];
                }
            }
            OpAccess::accumulate(t, ids[p], dp);
            off2 += cols[p];
        }
    });
}

Value slice(Value a, int start, int len) {
    const Tensor& A = val(a);
    int nd = A.ndim();
    if (nd != 1 && nd != 2) fail("slice: unsupported rank for " + shape_str(A.shape));
    int last = A.dim(nd - 1);
    if (len <= 0 || start < 0 || start + len > last) {
        fail("slice: range [" + std::to_string(start) + ", " + std::to_string(start + len) +
             ") out of bounds for " + shape_str(A.shape));
    }
    int rows = nd == 2 ? A.dim(0) : 1;
    Tensor out(nd == 2 ? std::vector<int>{rows, len} : std::vector<int>{len});
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < len; ++j) {
            out.values[static_cast<size_t>(i) * len + j] = A.values[static_cast<size_t>(i) * last + start + j];
        }
    }
    check_finite("slice", out);
    NodeBuilder builder{*a.tape, {a}};
    int ida = a.id;
    size_t in_size = A.values.size();
    return builder.make(std::move(out), [ida, start, len, rows, last, in_size](Tape& t, int self) {
        const std::vector<double>& g = self_adj(t, self);
        std::vector<double> da(in_size, 0.0);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < len; ++j) {
                da[static_cast<size_t>(i) * last + start + j] = g[static_cast<size_t>(i) * len + j];
            }
        }
        OpAccess::accumulate(t, ida, da);
    });
}

Value sigmoid(Value a) {
    Value out = unary_elementwise(
        "sigmoid", a, [](double x) { return stable_sigmoid(x); },
        [](double x, double g) {
            double s = stable_sigmoid(x);
            return g * s * (1.0 - s);
        });
    return out;
}

Value tanh(Value a) {
    return unary_elementwise(
        "tanh", a, [](double x) { return std::tanh(x); },
        [](double x, double g) {
            double th = std::tanh(x);
            return g * (1.0 - th * th);
        });
}

Value relu(Value a) {
    return unary_elementwise(
        "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double g) { return x > 0.0 ? g : 0.0; });
}

Value exp(Value a) {
    const Tensor& A = val(a);
    for (double x : A.values) {
        if (x > 709.0) fail("exp: overflow for input " + std::to_string(x));
    }
    return unary_elementwise(
        "exp", a, [](double x) { return std::exp(x); },
        [](double x, double g) { return g * std::exp(x); });
}

Value log(Value a) {
    const Tensor& A = val(a);
    for (double x : A.values) {
        if (x <= 0.0) fail("log: nonpositive input " + std::to_string(x));
    }
    return unary_elementwise(
        "log", a, [](double x) { return std::log(x); },
        [](double x, double g) { return g / x; });
}

Value softplus(Value a) {
    return unary_elementwise(
        "softplus", a,
        [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); },
        [](double x, double g) { return g * stable_sigmoid(x); });
}

namespace {

Value rowwise_softmax(Value a, bool log_form) {
    const char* name = log_form ? "log_softmax" : "softmax";
    const Tensor& A = val(a);
    int nd = A.ndim();
    if (nd != 1 && nd != 2) fail(std::string(name) + ": unsupported rank for " + shape_str(A.shape));
    int rows = nd == 2 ? A.dim(0) : 1;
    int cols = A.dim(nd - 1);
    Tensor out(A.shape);
    for (int i = 0; i < rows; ++i) {
        const double* x = A.values.data() + static_cast<size_t>(i) * cols;
        double lse = logsumexp(x, cols);
        double* o = out.values.data() + static_cast<size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) o[j] = log_form ? x[j] - lse : std::exp(x[j] - lse);
    }
    check_finite(name, out);
    NodeBuilder builder{*a.tape, {a}};
    int ida = a.id, self_rows = rows, self_cols = cols;
    return builder.make(std::move(out), [ida, self_rows, self_cols, log_form](Tape& t, int self) {
        const std::vector<double>& g = self_adj(t, self);
        const Tensor& o = t.value(Value{&t, self});
        std::vector<double> da(g.size());
        for (int i = 0; i < self_rows; ++i) {
            size_t base = static_cast<size_t>(i) * self_cols;
            if (log_form) {
                double gsum = 0.0;
                for (int j = 0; j < self_cols; ++j) gsum += g[base + j];
                for (int j = 0; j < self_cols; ++j) da[base + j] = g[base + j] - std::exp(o.values[base + j]) * gsum;
            } else {
                double dot = 0.0;
                for (int j = 0; j < self_cols; ++j) dot += g[base + j] * o.values[base + j];
                for (int j = 0; j < self_cols; ++j) da[base + j] = o.values[base + j] * (g[base + j] - dot);
            }
        }
        OpAccess::accumulate(t, ida, da);
    });
}

}  // namespace

Value softmax(Value a) { return rowwise_softmax(a, false); }

Value log_softmax(Value a) { return rowwise_softmax(a, true); }

Value sum(Value a) {
    const Tensor& A = val(a);
    double s = 0.0;
    for (double x : A.values) s += x;
    Tensor out = Tensor::scalar(s);
    check_finite("sum", out);
    NodeBuilder builder{*a.tape, {a}};
    int ida = a.id;
    size_t n = A.values.size();
    return builder.make(std::move(out), [ida, n](Tape& t, int self) {
        double g = self_adj(t, self)[0];
        OpAccess::accumulate(t, ida, std::vector<double>(n, g));
    });
}

Value mean(Value a) {
    const Tensor& A = val(a);
    double s = 0.0;
    for (double x : A.values) s += x;
    size_t n = A.values.size();
    Tensor out = Tensor::scalar(s / static_cast<double>(n));
    check_finite("mean", out);
    NodeBuilder builder{*a.tape, {a}};
    int ida = a.id;
    return builder.make(std::move(out), [ida, n](Tape& t, int self) {
        double g = self_adj(t, self)[0] / static_cast<double>(n);
        OpAccess::accumulate(t, ida, std::vector<double>(n, g));
    });
}

Value cross_entropy(Value logits, int target) {
    const Tensor& A = val(logits);
    if (A.ndim() != 1) fail("cross_entropy: logits must be a vector, got " + shape_str(A.shape));
    int n = A.dim(0);
    if (target < 0 || target >= n) {
        fail("cross_entropy: target " + std::to_string(target) + " out of range for " + shape_str(A.shape));
    }
    double lse = logsumexp(A.values.data(), n);
    Tensor out = Tensor::scalar(lse - A.values[static_cast<size_t>(target)]);
    check_finite("cross_entropy", out);
    NodeBuilder builder{*logits.tape, {logits}};
    int ida = logits.id;
    return builder.make(std::move(out), [ida, target, n, lse](Tape& t, int self) {
        double g = self_adj(t, self)[0];
        const Tensor& x = t.value(Value{&t, ida});
        std::vector<double> da(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j) {
            double p = std::exp(x.values[static_cast<size_t>(j)] - lse);
            da[static_cast<size_t>(j)] = g * (p - (j == target ? 1.0 : 0.0));
        }
        OpAccess::accumulate(t, ida, da);
    });
}

Value Tape::apply(Primitive p, const std::vector<Value>& inputs, const PrimitiveArgs& args) {
    auto expect = [&](size_t n) {
        if (inputs.size() != n) {
            fail(std::string(primitive_name(p)) + ": expected " + std::to_string(n) + " inputs, got " +
                 std::to_string(inputs.size()));
        }
    };
    switch (p) {
        case Primitive::matmul: expect(2); return ad::matmul(inputs[0], inputs[1]);
        case Primitive::add: expect(2); return ad::add(inputs[0], inputs[1]);
        case Primitive::mul: expect(2); return ad::mul(inputs[0], inputs[1]);
        case Primitive::concat: return ad::concat(inputs);
        case Primitive::sigmoid: expect(1); return ad::sigmoid(inputs[0]);
        case Primitive::tanh: expect(1); return ad::tanh(inputs[0]);
        case Primitive::relu: expect(1); return ad::relu(inputs[0]);
        case Primitive::exp: expect(1); return ad::exp(inputs[0]);
        case Primitive::log: expect(1); return ad::log(inputs[0]);
        case Primitive::softplus: expect(1); return ad::softplus(inputs[0]);
        case Primitive::softmax: expect(1); return ad::softmax(inputs[0]);
        case Primitive::sum: expect(1); return ad::sum(inputs[0]);
        case Primitive::mean: expect(1); return ad::mean(inputs[0]);
        case Primitive::slice: expect(1); return ad::slice(inputs[0], args.start, args.len);
        case Primitive::scale: expect(1); return ad::scale(inputs[0], args.factor);
        case Primitive::log_softmax: expect(1); return ad::log_softmax(inputs[0]);
        case Primitive::cross_entropy: expect(1); return ad::cross_entropy(inputs[0], args.target);
    }
    fail("apply: unknown primitive");
}

double gradient_check(const std::function<Value(Tape&, Value)>& f, const Tensor& point, double epsilon) {
    if (epsilon <= 0.0) throw std::invalid_argument("gradient_check: epsilon must be positive");

    Tensor x = point;
    x.require_grad();
    Tape tape;
    Value out = f(tape, tape.param(x));
    if (tape.value(out).numel() != 1) fail("gradient_check: function output is not scalar");
    tape.backward(out);
    std::vector<double> analytic = x.grad;

    double worst = 0.0;
    for (size_t i = 0; i < point.values.size(); ++i) {
        double lo, hi;
        {
            Tensor p = point;
            p.values[i] += epsilon;
            Tape t2;
            hi = t2.value(f(t2, t2.input(p))).item();
        }
        {
            Tensor p = point;
            p.values[i] -= epsilon;
            Tape t2;
            lo = t2.value(f(t2, t2.input(p))).item();
        }
        double numeric = (hi - lo) / (2.0 * epsilon);
        double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace ad
}  // namespace vsl
