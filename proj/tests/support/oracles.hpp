// oracles.hpp
// Independent reference computations for tests. Nothing here calls into the
// library's simulator, transform or renderers.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <fftw3.h>

namespace oracle {

using cplx = std::complex<double>;

/// Dense row-major square matrix.
struct Mat {
    std::size_t dim = 0;
    std::vector<cplx> v;

    explicit Mat(std::size_t d = 0) : dim(d), v(d * d) {}
    static Mat identity(std::size_t d) {
        Mat m(d);
        for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
        return m;
    }
    cplx& operator()(std::size_t r, std::size_t c) { return v[r * dim + c]; }
    cplx operator()(std::size_t r, std::size_t c) const { return v[r * dim + c]; }
};

inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.dim * b.dim);
    for (std::size_t i = 0; i < a.dim; ++i)
        for (std::size_t j = 0; j < a.dim; ++j)
            for (std::size_t k = 0; k < b.dim; ++k)
                for (std::size_t l = 0; l < b.dim; ++l) out(i * b.dim + k, j * b.dim + l) = a(i, j) * b(k, l);
    return out;
}

inline Mat matmul(const Mat& a, const Mat& b) {
    Mat out(a.dim);
    for (std::size_t i = 0; i < a.dim; ++i)
        for (std::size_t k = 0; k < a.dim; ++k) {
            const cplx aik = a(i, k);
            if (aik == cplx{}) continue;
            for (std::size_t j = 0; j < a.dim; ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

inline std::vector<cplx> mat_apply(const Mat& m, const std::vector<cplx>& x) {
    std::vector<cplx> y(m.dim);
    for (std::size_t i = 0; i < m.dim; ++i)
        for (std::size_t j = 0; j < m.dim; ++j) y[i] += m(i, j) * x[j];
    return y;
}

inline Mat ry(double t) {
    Mat m(2);
    m(0, 0) = std::cos(t / 2);
    m(0, 1) = -std::sin(t / 2);
    m(1, 0) = std::sin(t / 2);
    m(1, 1) = std::cos(t / 2);
    return m;
}

inline Mat rz(double t) {
    Mat m(2);
    m(0, 0) = std::polar(1.0, -t / 2);
    m(1, 1) = std::polar(1.0, t / 2);
    return m;
}

inline Mat pauli(char axis) {
    Mat m(2);
    switch (axis) {
        case 'X': m(0, 1) = m(1, 0) = 1.0; break;
        case 'Y': m(0, 1) = cplx{0, -1}; m(1, 0) = cplx{0, 1}; break;
        case 'Z': m(0, 0) = 1.0; m(1, 1) = -1.0; break;
        default: m = Mat::identity(2);
    }
    return m;
}

/// Single-qubit gate on `q` of `n`; qubit 0 is the most significant factor.
inline Mat on_qubit(const Mat& g, std::size_t q, std::size_t n) {
    Mat out = Mat::identity(1);
    for (std::size_t k = 0; k < n; ++k) out = kron(out, k == q ? g : Mat::identity(2));
    return out;
}

/// CX as |0><0| (x) I + |1><1| (x) X, assembled from projectors.
inline Mat cx(std::size_t control, std::size_t target, std::size_t n) {
    Mat p0(2), p1(2);
    p0(0, 0) = 1.0;
    p1(1, 1) = 1.0;
    Mat a = Mat::identity(1), b = Mat::identity(1);
    for (std::size_t k = 0; k < n; ++k) {
        a = kron(a, k == control ? p0 : Mat::identity(2));
        b = kron(b, k == control ? p1 : (k == target ? pauli('X') : Mat::identity(2)));
    }
    for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] += b.v[i];
    return a;
}

/// Full circuit unitary built gate by gate, applied to |0...0>. Pairs are the
/// entangler (control, target) list; parameter layout layer*2n + gate*n + q.
inline std::vector<cplx> ansatz_state(std::size_t n, std::size_t reps,
                                      const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                      const std::vector<double>& params) {
    const std::size_t dim = std::size_t{1} << n;
    Mat u = Mat::identity(dim);
    for (std::size_t layer = 0; layer <= reps; ++layer) {
        if (layer > 0)
            for (const auto& [c, t] : pairs) u = matmul(cx(c, t, n), u);
        for (std::size_t q = 0; q < n; ++q) {
            u = matmul(on_qubit(ry(params[layer * 2 * n + q]), q, n), u);
            u = matmul(on_qubit(rz(params[layer * 2 * n + n + q]), q, n), u);
        }
    }
    std::vector<cplx> e0(dim);
    e0[0] = 1.0;
    return mat_apply(u, e0);
}

inline Mat pauli_string(const std::string& axes) {
    Mat out = Mat::identity(1);
    for (char c : axes) out = kron(out, pauli(c));
    return out;
}

/// <psi| sum_k c_k P_k |psi> by dense matrices.
inline double dense_expectation(const std::vector<cplx>& psi, const std::vector<std::pair<double, std::string>>& terms) {
    double total = 0.0;
    for (const auto& [c, axes] : terms) {
        const auto hp = mat_apply(pauli_string(axes), psi);
        cplx s{};
        for (std::size_t i = 0; i < psi.size(); ++i) s += std::conj(psi[i]) * hp[i];
        total += c * s.real();
    }
    return total;
}

/// Q(x) = sum_i a_i x_i + sum_{i<j} b_ij x_i x_j straight from the definition.
inline double qubo(const std::vector<double>& a, const std::vector<std::vector<double>>& b, const std::string& x) {
    double q = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (x[i] != '1') continue;
        q += a[i];
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if (x[j] == '1') q += b[i][j];
    }
    return q;
}

inline std::string bits(std::uint64_t v, std::size_t n) {
    std::string s(n, '0');
    for (std::size_t k = 0; k < n; ++k)
        if ((v >> (n - 1 - k)) & 1U) s[k] = '1';
    return s;
}

/// Magnitude spectrum |X[k]|, k = 0..N/2, via FFTW.
inline std::vector<double> magnitude_spectrum(const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<double> in(x);
    auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(n / 2 + 1)));
    fftw_plan plan = fftw_plan_dft_r2c_1d(n, in.data(), out, FFTW_ESTIMATE);
    fftw_execute(plan);
    std::vector<double> mag(static_cast<std::size_t>(n / 2 + 1));
    for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::hypot(out[k][0], out[k][1]);
    fftw_destroy_plan(plan);
    fftw_free(out);
    return mag;
}

/// Normalized autocorrelation of a mean-removed series at lags 0..max_lag.
inline std::vector<double> autocorrelation(const std::vector<double>& x, std::size_t max_lag) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    std::vector<double> r(max_lag + 1, 0.0);
    if (var == 0.0) return r;
    for (std::size_t lag = 0; lag <= max_lag && lag < x.size(); ++lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < x.size(); ++i) s += (x[i] - mean) * (x[i + lag] - mean);
        r[lag] = s / var;
    }
    return r;
}

}  // namespace oracle
