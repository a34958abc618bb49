#pragma once

namespace ckam {

/// Which kernel to run. The serial variants are the reference the parallel
/// ones are tested against; outputs must agree bit for bit.
enum class Exec { kSerial, kParallel };

/// Threads used by parallel kernels (honours CKAM_THREADS, else OpenMP default).
int worker_threads();

}  // namespace ckam
