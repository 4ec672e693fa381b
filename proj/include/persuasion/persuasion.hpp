#pragma once

// Umbrella header.

#include "persuasion/binary.hpp"
#include "persuasion/core.hpp"
#include "persuasion/general.hpp"
#include "persuasion/geometry.hpp"
#include "persuasion/lp.hpp"
#include "persuasion/oracle.hpp"
#include "persuasion/receiver.hpp"
#include "persuasion/sim.hpp"

namespace persuasion {
inline constexpr const char* kVersion = "0.1.0";
}
