// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace ilap {

// sigma = 3^{4/3}/4; sigma^3 = 81/64 exactly.
inline constexpr double kSigma = 1.0816871777305563;
inline constexpr double kSigmaCubed = 81.0 / 64.0;

}  // namespace ilap
