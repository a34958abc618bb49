#include "ckam/exec.hpp"

#include <omp.h>

#include <cstdlib>

namespace ckam {

int worker_threads() {
  if (const char* env = std::getenv("CKAM_THREADS")) {
    char* end = nullptr;
    long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(n);
  }
  return omp_get_max_threads();
}

}  // namespace ckam
