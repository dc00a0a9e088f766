#pragma once

// Umbrella header for the smooth 1-Wasserstein toolkit.

#include "swd/common.hpp"
#include "swd/distance.hpp"
#include "swd/experiments.hpp"
#include "swd/inference.hpp"
#include "swd/measures.hpp"
#include "swd/mswe.hpp"
#include "swd/parallel.hpp"
#include "swd/report.hpp"
#include "swd/rng.hpp"
#include "swd/smoothing.hpp"
#include "swd/transport.hpp"
