#pragma once

#include "stiefelflow/errors.hpp"
#include "stiefelflow/matlin.hpp"
#include "stiefelflow/stiefel.hpp"
#include "stiefelflow/momentum.hpp"
#include "stiefelflow/flows.hpp"
#include "stiefelflow/integrate.hpp"
#include "stiefelflow/discrete.hpp"
#include "stiefelflow/laxspec.hpp"
#include "stiefelflow/diagnostics.hpp"
