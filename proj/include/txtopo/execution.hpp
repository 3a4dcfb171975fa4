#pragma once

namespace txtopo {

/// Selects between the OpenMP kernels and the serial reference loops.
enum class Execution { serial, parallel };

}  // namespace txtopo
