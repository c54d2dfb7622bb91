#pragma once

#include <cstddef>

#include "polyscat/kernels.hpp"

namespace polyscat::detail {

/// Runs f(i) for i in [0, n), row-parallel when requested. The loop body is the
/// same in both branches, so results do not depend on the execution mode.
template <class F>
void for_each_index(std::size_t n, kernels::Execution exec, F &&f) {
    const auto count = static_cast<std::ptrdiff_t>(n);
    if (exec == kernels::Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (std::ptrdiff_t i = 0; i < count; ++i) f(static_cast<std::size_t>(i));
    } else {
        for (std::ptrdiff_t i = 0; i < count; ++i) f(static_cast<std::size_t>(i));
    }
}

}  // namespace polyscat::detail
