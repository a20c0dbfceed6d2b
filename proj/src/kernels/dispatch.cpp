#include <atomic>
#include <cstdlib>
#include <string>

#include "fiblab/kernels.hpp"

namespace fiblab::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(FIBLAB_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("FIBLAB_ISA")) {
    const std::string v(env);
    if (v == "scalar") return Isa::Scalar;
    if (v == "avx2" && cpu_has_avx2()) return Isa::Avx2;
  }
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& isa_slot() {
  static std::atomic<Isa> slot{initial_isa()};
  return slot;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  return isa == Isa::Scalar || (isa == Isa::Avx2 && cpu_has_avx2());
}

Isa active_isa() { return isa_slot().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (isa_available(isa)) isa_slot().store(isa, std::memory_order_relaxed);
}

#if !defined(FIBLAB_HAVE_AVX2)
void eval_avx2(const PolyTable& table, const double* points, std::size_t stride,
               std::size_t begin, std::size_t end, double* out) {
  eval_scalar(table, points, stride, begin, end, out);
}
#endif

void eval(const PolyTable& table, const double* points, std::size_t stride, double* out) {
  if (active_isa() == Isa::Avx2)
    eval_avx2(table, points, stride, 0, stride, out);
  else
    eval_scalar(table, points, stride, 0, stride, out);
}

}  // namespace fiblab::kernels
