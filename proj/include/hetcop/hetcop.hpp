#pragma once

// Umbrella header.

#include "hetcop/bicop.hpp"
#include "hetcop/common.hpp"
#include "hetcop/datagen.hpp"
#include "hetcop/dvine.hpp"
#include "hetcop/forecast.hpp"
#include "hetcop/inference.hpp"
#include "hetcop/io.hpp"
#include "hetcop/margins.hpp"
#include "hetcop/quadrature.hpp"
#include "hetcop/rng.hpp"
#include "hetcop/roots.hpp"
#include "hetcop/special.hpp"
#include "hetcop/stats.hpp"
#include "hetcop/threads.hpp"
#include "hetcop/volcop.hpp"
