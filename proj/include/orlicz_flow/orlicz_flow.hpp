#pragma once

// Umbrella header: the whole library.

#include "orlicz_flow/body_geometry.hpp"
#include "orlicz_flow/cli.hpp"
#include "orlicz_flow/diagnostics.hpp"
#include "orlicz_flow/dual.hpp"
#include "orlicz_flow/errors.hpp"
#include "orlicz_flow/expression.hpp"
#include "orlicz_flow/flow.hpp"
#include "orlicz_flow/logging.hpp"
#include "orlicz_flow/newton_oracle.hpp"
#include "orlicz_flow/problem_data.hpp"
#include "orlicz_flow/run_config.hpp"
#include "orlicz_flow/sphere_grid.hpp"
