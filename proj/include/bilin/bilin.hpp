#pragma once

/// Umbrella header for the whole library.

#include "bilin/numbers.hpp"
#include "bilin/polyops.hpp"
#include "bilin/signals.hpp"
#include "bilin/spectral.hpp"
#include "bilin/iw.hpp"
#include "bilin/averages.hpp"
#include "bilin/variation.hpp"
#include "bilin/padic.hpp"
#include "bilin/rng.hpp"
#include "bilin/martingale.hpp"
