#pragma once

namespace wgfd {

// Selects between the serial reference kernels and the OpenMP kernels.
// Both paths compute every output element with the same summation order,
// so their results are bit-identical.
enum class Exec { Serial, Parallel };

// Number of OpenMP threads available (1 when built without OpenMP).
int max_threads();

} // namespace wgfd
