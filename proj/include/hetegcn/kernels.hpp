#pragma once

#include <cstddef>
#include <cstdint>

namespace hetegcn::kernels {

// Dense inner loops behind every matrix product and optimizer update.
// Each kernel has a scalar reference implementation and, on x86-64, an
// AVX2 variant selected at runtime. Vector variants operate lane-wise on
// independent output elements and use separate multiply and add (no FMA
// contraction), so every backend produces bitwise-identical results; the
// equivalence tests assert exact equality. Reductions stay scalar for the
// same reason: a lane-parallel sum would change the association order.

enum class Backend {
    scalar,
    avx2,
};

const char* backend_name(Backend b);

/// True when the host CPU can execute the AVX2 variants.
bool avx2_available();

/// Backend currently routed through the dispatch table.
Backend active_backend();

/// Force a backend (throws ConfigError if unsupported on this host).
/// The HETEGCN_KERNELS environment variable (scalar|avx2|auto) is honored
/// once at startup before any explicit call.
void set_backend(Backend b);

struct KernelTable {
    // y[i] += a * x[i]
    void (*axpy)(double* y, double a, const double* x, std::size_t n);
    // y[i] *= a
    void (*scal)(double* y, double a, std::size_t n);
    // out[i] = max(in[i], 0)
    void (*relu)(double* out, const double* in, std::size_t n);
    // grad[i] = pre[i] > 0 ? grad[i] : 0
    void (*relu_backward)(double* grad, const double* pre, std::size_t n);
    // y[i] = keep[i] ? y[i] * scale : 0   (inverted-dropout apply/replay)
    void (*apply_mask)(double* y, const std::uint8_t* keep, double scale,
                       std::size_t n);
    // Fused Adam update with bias correction:
    //   m = b1*m + (1-b1)*g; v = b2*v + (1-b2)*g*g
    //   w -= lr * (m/bc1) / (sqrt(v/bc2) + eps)
    void (*adam_update)(double* w, double* m, double* v, const double* g,
                        std::size_t n, double beta1, double beta2, double eps,
                        double lr, double bias_corr1, double bias_corr2);
};

const KernelTable& table(Backend b);

inline void axpy(double* y, double a, const double* x, std::size_t n) {
    table(active_backend()).axpy(y, a, x, n);
}
inline void scal(double* y, double a, std::size_t n) {
    table(active_backend()).scal(y, a, n);
}
inline void relu(double* out, const double* in, std::size_t n) {
    table(active_backend()).relu(out, in, n);
}
inline void relu_backward(double* grad, const double* pre, std::size_t n) {
    table(active_backend()).relu_backward(grad, pre, n);
}
inline void apply_mask(double* y, const std::uint8_t* keep, double scale,
                       std::size_t n) {
    table(active_backend()).apply_mask(y, keep, scale, n);
}
inline void adam_update(double* w, double* m, double* v, const double* g,
                        std::size_t n, double beta1, double beta2, double eps,
                        double lr, double bias_corr1, double bias_corr2) {
    table(active_backend())
        .adam_update(w, m, v, g, n, beta1, beta2, eps, lr, bias_corr1,
                     bias_corr2);
}

// Scalar reductions (not dispatched; see note above).
double sum(const double* x, std::size_t n);
double sum_squares(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);

} // namespace hetegcn::kernels
