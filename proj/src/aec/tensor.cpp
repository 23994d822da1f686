#include "aec/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace aec {

std::int64_t shape_numel(const std::vector<int>& shape) {
    if (shape.empty()) return 0;
    std::int64_t n = 1;
    for (int e : shape) n *= e;
    return n;
}

Tensor::Tensor(std::vector<int> s)
    : shape(std::move(s)), data(static_cast<std::size_t>(shape_numel(shape)), 0.0f) {
    for (int e : shape) {
        if (e <= 0) throw std::invalid_argument("tensor extent must be positive, got " + shape_str(shape));
    }
}

Tensor::Tensor(std::vector<int> s, float fill)
    : shape(std::move(s)), data(static_cast<std::size_t>(shape_numel(shape)), fill) {}

Tensor::Tensor(std::vector<int> s, std::vector<float> d) : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<std::int64_t>(data.size()) != shape_numel(shape))
        throw std::invalid_argument("tensor data length " + std::to_string(data.size()) +
                                    " does not match shape " + shape_str(shape));
}

bool Tensor::all_finite() const {
    for (float v : data)
        if (!std::isfinite(v)) return false;
    return true;
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

void require_shape(const Tensor& t, const std::vector<int>& expect, const char* what) {
    if (t.shape != expect)
        throw std::invalid_argument(std::string(what) + ": expected shape " + shape_str(expect) +
                                    ", got " + shape_str(t.shape));
}

}  // namespace aec
