#include <cstdlib>
#include <cstring>

#include "dyneq/simd/fr_kernels.hpp"

namespace dyneq::simd {

const FrKernels* avx2_table_if_compiled();

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "?";
}

const FrKernels* avx2_kernels() {
  static const FrKernels* table = [] () -> const FrKernels* {
    const FrKernels* t = avx2_table_if_compiled();
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
    if (t && __builtin_cpu_supports("avx2")) return t;
#endif
    return nullptr;
  }();
  return table;
}

const FrKernels& active_kernels() {
  static const FrKernels& table = [] () -> const FrKernels& {
    const char* force = std::getenv("DYNEQ_FORCE_SCALAR");
    if (force && std::strcmp(force, "0") != 0) return scalar_kernels();
    if (const FrKernels* t = avx2_kernels()) return *t;
    return scalar_kernels();
  }();
  return table;
}

}  // namespace dyneq::simd
