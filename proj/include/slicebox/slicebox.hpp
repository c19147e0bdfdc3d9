#pragma once

#include "slicebox/diagnostics.hpp"
#include "slicebox/errors.hpp"
#include "slicebox/expression.hpp"
#include "slicebox/report_io.hpp"
#include "slicebox/rng.hpp"
#include "slicebox/samplers.hpp"
#include "slicebox/scenario.hpp"
#include "slicebox/targets.hpp"
#include "slicebox/transforms.hpp"
