// common.hpp — shared numeric constants, error types, and small helpers

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace qh {

using cplx = std::complex<double>;

// Default absolute tolerance for structural validation (hermiticity,
// idempotence, normalization). Individual checks may widen it explicitly.
inline constexpr double kDefaultTol = 1e-9;

// Hard cap on the dimension of any assembled tensor-product space.
inline constexpr int kTensorDimCap = 4096;

// Thrown when a requested computation would exceed a resource cap
// (tensor-space dimension, grid sizes). Maps to a distinct CLI exit code.
class cap_error : public std::runtime_error {
public:
    explicit cap_error(const std::string& what) : std::runtime_error(what) {}
};

inline bool nearly_equal(double a, double b, double tol) noexcept {
    return std::abs(a - b) <= tol;
}

}  // namespace qh
