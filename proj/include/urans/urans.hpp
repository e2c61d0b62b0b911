#pragma once

// Umbrella header.

#include "commands.hpp"
#include "config.hpp"
#include "diagnostics.hpp"
#include "output.hpp"
#include "rates.hpp"
#include "run.hpp"
#include "solver.hpp"
#include "verify.hpp"
