#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace aec {

// Dense row-major float tensor. The single numeric carrier for images,
// network parameters, encodings and optimizer state.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s);
    Tensor(std::vector<int> s, float fill);
    Tensor(std::vector<int> s, std::vector<float> d);

    static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
    static Tensor full(std::vector<int> s, float v) { return Tensor(std::move(s), v); }

    std::int64_t numel() const {
        std::int64_t n = 1;
        for (int e : shape) n *= e;
        return shape.empty() ? 0 : n;
    }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
    int rank() const { return static_cast<int>(shape.size()); }

    float& operator[](std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
    float operator[](std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }

    // 3-d / 4-d element access, row-major.
    float& at3(int i, int j, int k) {
        return data[static_cast<std::size_t>((i * shape[1] + j) * shape[2] + k)];
    }
    float at3(int i, int j, int k) const {
        return data[static_cast<std::size_t>((i * shape[1] + j) * shape[2] + k)];
    }
    float& at4(int n, int i, int j, int k) {
        return data[static_cast<std::size_t>(((n * shape[1] + i) * shape[2] + j) * shape[3] + k)];
    }
    float at4(int n, int i, int j, int k) const {
        return data[static_cast<std::size_t>(((n * shape[1] + i) * shape[2] + j) * shape[3] + k)];
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    bool all_finite() const;
};

std::string shape_str(const std::vector<int>& shape);
std::int64_t shape_numel(const std::vector<int>& shape);

// Throws std::invalid_argument naming `what` when shapes differ.
void require_shape(const Tensor& t, const std::vector<int>& expect, const char* what);

// Double-precision twin used by the finite-difference gradient checker.
// Production code runs in f32; the checker instantiates the same templated
// kernels in f64 so central differences resolve below the 1e-4 tolerance.
struct DTensor {
    std::vector<int> shape;
    std::vector<double> data;

    DTensor() = default;
    explicit DTensor(std::vector<int> s)
        : shape(std::move(s)), data(static_cast<std::size_t>(shape_numel(shape)), 0.0) {}
    DTensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {}

    std::int64_t numel() const { return shape_numel(shape); }

    static DTensor from(const Tensor& t) {
        DTensor d;
        d.shape = t.shape;
        d.data.assign(t.data.begin(), t.data.end());
        return d;
    }
};

}  // namespace aec
