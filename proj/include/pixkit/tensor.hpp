#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

namespace pixkit {

// Dense row-major f64 tensor. Deliberately minimal: every quantity in this
// repo (tokens, velocities, scores, 2D points) fits in a flat double buffer
// plus a shape.
struct Tensor {
    std::vector<size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<size_t> shape_);
    Tensor(std::vector<size_t> shape_, std::vector<double> data_);

    static Tensor zeros(std::vector<size_t> shape);
    static Tensor full(std::vector<size_t> shape, double value);
    static Tensor vec(std::initializer_list<double> values);  // rank-1 literal

    size_t numel() const;
    size_t rank() const { return shape.size(); }

    double& at(size_t i) { return data[i]; }
    double at(size_t i) const { return data[i]; }
    // rank-2 accessors, row-major
    double& at(size_t i, size_t j) { return data[i * shape[1] + j]; }
    double at(size_t i, size_t j) const { return data[i * shape[1] + j]; }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    bool all_finite() const;
};

// elementwise ops used all over; shapes must match exactly
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor axpy(double alpha, const Tensor& x, const Tensor& y);  // alpha*x + y
double dot(const Tensor& a, const Tensor& b);

/// Numerically stable softmax of a rank-1 tensor (max-subtraction).
/// Output sums to 1 within 1e-12. Empty input is an error.
Tensor softmax(const Tensor& v);

/// Central-difference gradient of a scalar function, one coordinate at a
/// time: (f(x+eps*e_i) - f(x-eps*e_i)) / (2*eps). Test oracle, not a
/// performance path. Non-finite f values are an error.
Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f,
                                  const Tensor& x, double eps);

std::string shape_str(const std::vector<size_t>& shape);

}  // namespace pixkit
