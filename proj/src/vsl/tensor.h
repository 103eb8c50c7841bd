#pragma once

#include <string>
#include <vector>

namespace vsl {

// Dense row-major float64 tensor. Gradients are separate same-shape buffers
// allocated only for tensors that participate in optimization; they
// accumulate across backward passes until zero_grad.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;

    Tensor() = default;
    explicit Tensor(std::vector<int> s);
    Tensor(std::vector<int> s, std::vector<double> v);

    static Tensor scalar(double v);
    static Tensor zeros(std::vector<int> s);
    static Tensor full(std::vector<int> s, double v);

    int ndim() const { return static_cast<int>(shape.size()); }
    int dim(int axis) const { return shape[static_cast<size_t>(axis)]; }
    int numel() const;
    bool is_scalar() const { return numel() == 1; }
    double item() const;

    void require_grad();
    void zero_grad();

    // flat row-major access for 2-D tensors
    double& at(int r, int c) { return values[static_cast<size_t>(r) * dim(1) + c]; }
    double at(int r, int c) const { return values[static_cast<size_t>(r) * dim(1) + c]; }
};

std::string shape_str(const std::vector<int>& shape);
bool all_finite(const std::vector<double>& v);

}  // namespace vsl
