// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include <fel/errors.hpp>

namespace fel {

/// Kernels supported by the smoother. Both are supported on [0, 1] and
/// vanish for s > 1.
enum class KernelKind {
  quadratic,  // K(s) = 1 - s^2 on [0, 1]
  uniform,    // K(s) = 1 on [0, 1]
};

inline double kernel_eval(KernelKind kind, double s) {
  if (!(s >= 0.0)) throw InvalidArgument("kernel argument must be >= 0");
  if (s > 1.0) return 0.0;
  switch (kind) {
    case KernelKind::quadratic:
      return 1.0 - s * s;
    case KernelKind::uniform:
      return 1.0;
  }
  throw InvalidArgument("unknown kernel kind");
}

inline std::string to_string(KernelKind kind) {
  return kind == KernelKind::quadratic ? "quadratic" : "uniform";
}

inline KernelKind parse_kernel(const std::string& name) {
  if (name == "quadratic") return KernelKind::quadratic;
  if (name == "uniform") return KernelKind::uniform;
  throw InvalidArgument("unknown kernel: " + name);
}

}  // namespace fel
