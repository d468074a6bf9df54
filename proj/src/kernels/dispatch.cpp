#include "epr/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace epr::kernels {
namespace {

bool avx2_available() {
#if EPR_HAVE_AVX2_BUILD
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

struct Selection {
  const Ops* ops;
  const char* name;
};

Selection select() {
  const char* forced = std::getenv("EPR_KERNELS");
  if (forced != nullptr) {
    if (std::strcmp(forced, "scalar") == 0) return {&detail::scalar_ops, "scalar"};
#if EPR_HAVE_AVX2_BUILD
    if (std::strcmp(forced, "avx2") == 0 && avx2_available())
      return {&detail::avx2_ops, "avx2"};
#endif
  }
#if EPR_HAVE_AVX2_BUILD
  if (avx2_available()) return {&detail::avx2_ops, "avx2"};
#endif
  return {&detail::scalar_ops, "scalar"};
}

const Selection& selection() {
  static const Selection s = select();
  return s;
}

}  // namespace

const Ops& active() { return *selection().ops; }

const char* active_name() { return selection().name; }

const Ops* variant(const std::string& name) {
  if (name == "scalar") return &detail::scalar_ops;
#if EPR_HAVE_AVX2_BUILD
  if (name == "avx2" && avx2_available()) return &detail::avx2_ops;
#endif
  return nullptr;
}

}  // namespace epr::kernels
