#include <cstdlib>
#include <string>

#include "hetegcn/error.hpp"
#include "hetegcn/kernels.hpp"

namespace hetegcn::kernels {

const KernelTable& scalar_table();
#ifdef HETEGCN_HAVE_AVX2
const KernelTable& avx2_table();
#endif

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
    }
    return "?";
}

bool avx2_available() {
#if defined(HETEGCN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

namespace {

Backend pick_default() {
    if (const char* env = std::getenv("HETEGCN_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") return Backend::scalar;
        if (want == "avx2") {
            if (!avx2_available())
                throw ConfigError("HETEGCN_KERNELS=avx2 but this CPU has no AVX2");
            return Backend::avx2;
        }
        if (!want.empty() && want != "auto")
            throw ConfigError("unknown HETEGCN_KERNELS value: " + want);
    }
    return avx2_available() ? Backend::avx2 : Backend::scalar;
}

Backend& current() {
    static Backend b = pick_default();
    return b;
}

} // namespace

Backend active_backend() { return current(); }

void set_backend(Backend b) {
    if (b == Backend::avx2 && !avx2_available())
        throw ConfigError("AVX2 backend requested but not available on this CPU");
    current() = b;
}

const KernelTable& table(Backend b) {
#ifdef HETEGCN_HAVE_AVX2
    if (b == Backend::avx2) return avx2_table();
#endif
    (void)b;
    return scalar_table();
}

} // namespace hetegcn::kernels
