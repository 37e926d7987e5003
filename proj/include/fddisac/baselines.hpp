#pragma once

#include <vector>

#include "fddisac/sinr_blocks.hpp"

namespace fddisac {

/// Maximum-ratio transmission: private blocks h_k/||h_k||, no common or radar
/// power, unit total norm.
CVec mrt_precoder(const std::vector<CVec>& channels, const Dims& dims);

/// Regularized zero forcing: columns of H (H^H H + (K sigma^2/P) I)^{-1},
/// each normalized, unit total norm.
CVec rzf_precoder(const std::vector<CVec>& channels, const Dims& dims,
                  double sigma_sq_over_p);

}  // namespace fddisac
