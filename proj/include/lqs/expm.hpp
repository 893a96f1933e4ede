#pragma once

#include "lqs/types.hpp"

namespace lqs {

// Matrix exponential by scaling and squaring with a degree-13 Pade approximant
// (Higham 2005).
CMat expm(const CMat& A);
RMat expm(const RMat& A);

}  // namespace lqs
