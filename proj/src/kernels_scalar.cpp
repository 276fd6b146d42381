#include <cmath>

#include "hetegcn/kernels.hpp"

// Reference kernels. These define the exact arithmetic (operation order and
// rounding) that every other backend must reproduce bit-for-bit.

namespace hetegcn::kernels {
namespace {

void axpy_scalar(double* y, double a, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += a * x[i];
    }
}

void scal_scalar(double* y, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] *= a;
    }
}

void relu_scalar(double* out, const double* in, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = in[i] > 0.0 ? in[i] : 0.0;
    }
}

void relu_backward_scalar(double* grad, const double* pre, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!(pre[i] > 0.0)) grad[i] = 0.0;
    }
}

void apply_mask_scalar(double* y, const std::uint8_t* keep, double scale,
                       std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = keep[i] ? y[i] * scale : 0.0;
    }
}

void adam_update_scalar(double* w, double* m, double* v, const double* g,
                        std::size_t n, double beta1, double beta2, double eps,
                        double lr, double bias_corr1, double bias_corr2) {
    for (std::size_t i = 0; i < n; ++i) {
        const double gi = g[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
        v[i] = beta2 * v[i] + (1.0 - beta2) * (gi * gi);
        const double m_hat = m[i] / bias_corr1;
        const double v_hat = v[i] / bias_corr2;
        w[i] -= lr * (m_hat / (std::sqrt(v_hat) + eps));
    }
}

} // namespace

const KernelTable& scalar_table() {
    static const KernelTable t{
        axpy_scalar,        scal_scalar,       relu_scalar,
        relu_backward_scalar, apply_mask_scalar, adam_update_scalar,
    };
    return t;
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double sum_squares(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

double dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

} // namespace hetegcn::kernels
