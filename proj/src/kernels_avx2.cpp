// AVX2 variants. Compiled with -mavx2 only; runtime dispatch keeps them off
// CPUs without the feature. Multiplies and adds are kept as separate
// instructions so each output element sees the same rounding sequence as the
// scalar reference, making the two backends bitwise-equal.

#include "hetegcn/kernels.hpp"

#ifdef __AVX2__

#include <immintrin.h>

namespace hetegcn::kernels {
namespace {

void axpy_avx2(double* y, double a, const double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scal_avx2(double* y, double a, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(y + i), va));
    }
    for (; i < n; ++i) y[i] *= a;
}

void relu_avx2(double* out, const double* in, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // vmaxpd returns the second operand on equality or NaN, matching
        // the scalar `in > 0 ? in : 0` for -0.0 and NaN inputs.
        _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(in + i), zero));
    }
    for (; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward_avx2(double* grad, const double* pre, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask =
            _mm256_cmp_pd(_mm256_loadu_pd(pre + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(grad + i,
                         _mm256_and_pd(_mm256_loadu_pd(grad + i), mask));
    }
    for (; i < n; ++i) {
        if (!(pre[i] > 0.0)) grad[i] = 0.0;
    }
}

void apply_mask_avx2(double* y, const std::uint8_t* keep, double scale,
                     std::size_t n) {
    const __m256d vs = _mm256_set1_pd(scale);
    const __m256i izero = _mm256_setzero_si256();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        std::uint32_t packed;
        __builtin_memcpy(&packed, keep + i, 4);
        const __m256i k =
            _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(static_cast<int>(packed)));
        const __m256d mask =
            _mm256_castsi256_pd(_mm256_cmpgt_epi64(k, izero));
        const __m256d scaled = _mm256_mul_pd(_mm256_loadu_pd(y + i), vs);
        _mm256_storeu_pd(y + i, _mm256_and_pd(scaled, mask));
    }
    for (; i < n; ++i) y[i] = keep[i] ? y[i] * scale : 0.0;
}

void adam_update_avx2(double* w, double* m, double* v, const double* g,
                      std::size_t n, double beta1, double beta2, double eps,
                      double lr, double bias_corr1, double bias_corr2) {
    const __m256d vb1 = _mm256_set1_pd(beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2);
    const __m256d vc1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d vc2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d vbc1 = _mm256_set1_pd(bias_corr1);
    const __m256d vbc2 = _mm256_set1_pd(bias_corr2);
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d vlr = _mm256_set1_pd(lr);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vg = _mm256_loadu_pd(g + i);
        __m256d vm = _mm256_loadu_pd(m + i);
        __m256d vv = _mm256_loadu_pd(v + i);
        vm = _mm256_add_pd(_mm256_mul_pd(vb1, vm), _mm256_mul_pd(vc1, vg));
        vv = _mm256_add_pd(_mm256_mul_pd(vb2, vv),
                           _mm256_mul_pd(vc2, _mm256_mul_pd(vg, vg)));
        _mm256_storeu_pd(m + i, vm);
        _mm256_storeu_pd(v + i, vv);
        const __m256d m_hat = _mm256_div_pd(vm, vbc1);
        const __m256d v_hat = _mm256_div_pd(vv, vbc2);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(v_hat), veps);
        const __m256d step = _mm256_mul_pd(vlr, _mm256_div_pd(m_hat, denom));
        _mm256_storeu_pd(w + i, _mm256_sub_pd(_mm256_loadu_pd(w + i), step));
    }
    // Remainder reuses the scalar arithmetic element-for-element.
    table(Backend::scalar)
        .adam_update(w + i, m + i, v + i, g + i, n - i, beta1, beta2, eps, lr,
                     bias_corr1, bias_corr2);
}

} // namespace

const KernelTable& avx2_table() {
    static const KernelTable t{
        axpy_avx2,          scal_avx2,       relu_avx2,
        relu_backward_avx2, apply_mask_avx2, adam_update_avx2,
    };
    return t;
}

} // namespace hetegcn::kernels

#endif // __AVX2__
