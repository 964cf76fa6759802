#pragma once

#include "fracdelay/errors.hpp"
#include "fracdelay/types.hpp"
#include "fracdelay/kernels.hpp"
#include "fracdelay/calculus.hpp"
#include "fracdelay/branch.hpp"
#include "fracdelay/extended.hpp"
#include "fracdelay/resolvent.hpp"
#include "fracdelay/solver.hpp"
#include "fracdelay/symbol.hpp"
#include "fracdelay/mr.hpp"
#include "fracdelay/config.hpp"

namespace fracdelay {

inline constexpr const char* version = "0.1.0";

} // namespace fracdelay
