#include "vsl/tensor.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace vsl {

namespace {
size_t checked_numel(const std::vector<int>& shape) {
    size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw std::invalid_argument("Tensor: nonpositive extent in shape " + shape_str(shape));
        n *= static_cast<size_t>(d);
    }
    return n;
}
}  // namespace

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
    values.assign(checked_numel(shape), 0.0);
}

Tensor::Tensor(std::vector<int> s, std::vector<double> v) : shape(std::move(s)), values(std::move(v)) {
    if (checked_numel(shape) != values.size()) {
        throw std::invalid_argument("Tensor: shape " + shape_str(shape) + " does not match value count " +
                                    std::to_string(values.size()));
    }
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::zeros(std::vector<int> s) { return Tensor(std::move(s)); }

Tensor Tensor::full(std::vector<int> s, double v) {
    Tensor t(std::move(s));
    for (auto& x : t.values) x = v;
    return t;
}

int Tensor::numel() const { return static_cast<int>(values.size()); }

double Tensor::item() const {
    if (numel() != 1) throw std::runtime_error("Tensor::item: tensor of shape " + shape_str(shape) + " is not scalar");
    return values[0];
}

void Tensor::require_grad() {
    requires_grad = true;
    grad.assign(values.size(), 0.0);
}

void Tensor::zero_grad() {
    if (requires_grad) grad.assign(values.size(), 0.0);
}

std::string shape_str(const std::vector<int>& shape) {
    std::ostringstream os;
    os << '(';
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ')';
    return os.str();
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace vsl
