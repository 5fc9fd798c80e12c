// smallmat.hpp — minimal dense complex<long double> matrix kernel used where
// fourth-order finite differences need headroom below the double noise floor

#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qh::smallmat {

using lcplx = std::complex<long double>;

struct LMatrix {
    int n{0};
    std::vector<lcplx> a;  // row-major

    LMatrix() = default;
    explicit LMatrix(int dim) : n(dim), a(static_cast<std::size_t>(dim) * dim) {
        if (dim < 1)
            throw std::invalid_argument("LMatrix: dimension must be positive");
    }

    lcplx& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    const lcplx& at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

    static LMatrix identity(int dim) {
        LMatrix m(dim);
        for (int i = 0; i < dim; ++i)
            m.at(i, i) = 1.0L;
        return m;
    }
};

inline LMatrix mul(const LMatrix& x, const LMatrix& y) {
    if (x.n != y.n)
        throw std::invalid_argument("smallmat::mul: dimension mismatch");
    LMatrix out(x.n);
    for (int i = 0; i < x.n; ++i) {
        for (int k = 0; k < x.n; ++k) {
            const lcplx xik = x.at(i, k);
            if (xik == lcplx(0.0L, 0.0L))
                continue;
            for (int j = 0; j < x.n; ++j)
                out.at(i, j) += xik * y.at(k, j);
        }
    }
    return out;
}

inline LMatrix adjoint(const LMatrix& x) {
    LMatrix out(x.n);
    for (int i = 0; i < x.n; ++i)
        for (int j = 0; j < x.n; ++j)
            out.at(i, j) = std::conj(x.at(j, i));
    return out;
}

inline lcplx trace(const LMatrix& x) {
    lcplx t = 0.0L;
    for (int i = 0; i < x.n; ++i)
        t += x.at(i, i);
    return t;
}

inline long double one_norm(const LMatrix& x) {
    long double best = 0.0L;
    for (int j = 0; j < x.n; ++j) {
        long double col = 0.0L;
        for (int i = 0; i < x.n; ++i)
            col += std::abs(x.at(i, j));
        best = std::max(best, col);
    }
    return best;
}

// Scaling-and-squaring Taylor exponential; adequate for the small well-scaled
// anti-Hermitian exponents used here.
inline LMatrix expm(const LMatrix& x) {
    int squarings = 0;
    long double norm = one_norm(x);
    while (norm > 0.25L && squarings < 64) {
        norm *= 0.5L;
        ++squarings;
    }
    const long double scale = std::pow(0.5L, static_cast<long double>(squarings));
    LMatrix t(x.n);
    for (std::size_t k = 0; k < x.a.size(); ++k)
        t.a[k] = x.a[k] * scale;

    LMatrix acc = LMatrix::identity(x.n);
    LMatrix term = LMatrix::identity(x.n);
    for (int k = 1; k <= 64; ++k) {
        term = mul(term, t);
        for (std::size_t idx = 0; idx < term.a.size(); ++idx)
            term.a[idx] /= static_cast<long double>(k);
        for (std::size_t idx = 0; idx < acc.a.size(); ++idx)
            acc.a[idx] += term.a[idx];
        if (one_norm(term) < 1e-24L)
            break;
    }
    for (int s = 0; s < squarings; ++s)
        acc = mul(acc, acc);
    return acc;
}

}  // namespace qh::smallmat
