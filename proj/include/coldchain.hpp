#pragma once

// Umbrella header for the library. The command-line layer (coldchain/cli.hpp)
// is not included here because it pulls in CLI11 and nlohmann/json.

#include "coldchain/errors.hpp"
#include "coldchain/core_model.hpp"
#include "coldchain/specfun.hpp"
#include "coldchain/vacuum_coupling.hpp"
#include "coldchain/fiber_coupling.hpp"
#include "coldchain/level_shift.hpp"
#include "coldchain/spectral.hpp"
#include "coldchain/waveguide_scattering.hpp"
#include "coldchain/parallel.hpp"
#include "coldchain/disorder_scaling.hpp"
#include "coldchain/sweeps.hpp"
