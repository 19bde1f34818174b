#include "pixkit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pixkit {

static size_t shape_numel(const std::vector<size_t>& shape) {
    size_t n = 1;
    for (size_t d : shape) n *= d;
    return n;
}

Tensor::Tensor(std::vector<size_t> shape_) : shape(std::move(shape_)) {
    data.assign(shape_numel(shape), 0.0);
}

Tensor::Tensor(std::vector<size_t> shape_, std::vector<double> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
    if (data.size() != shape_numel(shape)) {
        throw std::invalid_argument("Tensor: data size " + std::to_string(data.size()) +
                                    " does not match shape " + shape_str(shape));
    }
}

Tensor Tensor::zeros(std::vector<size_t> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::vec(std::initializer_list<double> values) {
    return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::full(std::vector<size_t> shape, double value) {
    Tensor t(std::move(shape));
    std::fill(t.data.begin(), t.data.end(), value);
    return t;
}

size_t Tensor::numel() const { return data.size(); }

bool Tensor::all_finite() const {
    return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

std::string shape_str(const std::vector<size_t>& shape) {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

static void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape) +
                                    " vs " + shape_str(b.shape));
    }
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    Tensor out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    Tensor out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

Tensor scale(const Tensor& a, double s) {
    Tensor out = a;
    for (double& v : out.data) v *= s;
    return out;
}

Tensor axpy(double alpha, const Tensor& x, const Tensor& y) {
    check_same_shape(x, y, "axpy");
    Tensor out = y;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += alpha * x.data[i];
    return out;
}

double dot(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "dot");
    double s = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

Tensor softmax(const Tensor& v) {
    if (v.numel() == 0) throw std::invalid_argument("softmax: empty input");
    const double m = *std::max_element(v.data.begin(), v.data.end());
    Tensor out = v;
    double sum = 0.0;
    for (double& x : out.data) {
        x = std::exp(x - m);
        sum += x;
    }
    for (double& x : out.data) x /= sum;
    return out;
}

Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f,
                                  const Tensor& x, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("finite_difference_gradient: eps must be > 0");
    Tensor grad(x.shape);
    Tensor probe = x;
    for (size_t i = 0; i < x.numel(); ++i) {
        const double orig = probe.data[i];
        probe.data[i] = orig + eps;
        const double fp = f(probe);
        probe.data[i] = orig - eps;
        const double fm = f(probe);
        probe.data[i] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw std::runtime_error("finite_difference_gradient: non-finite f at coordinate " +
                                     std::to_string(i));
        }
        grad.data[i] = (fp - fm) / (2.0 * eps);
    }
    return grad;
}

}  // namespace pixkit
