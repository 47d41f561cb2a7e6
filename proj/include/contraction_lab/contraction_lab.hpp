#pragma once

#include "contraction_lab/common.hpp"
#include "contraction_lab/config.hpp"
#include "contraction_lab/experiment.hpp"
#include "contraction_lab/grid.hpp"
#include "contraction_lab/inference.hpp"
#include "contraction_lab/io.hpp"
#include "contraction_lab/metrics.hpp"
#include "contraction_lab/mittag_leffler.hpp"
#include "contraction_lab/pde.hpp"
#include "contraction_lab/prior.hpp"
#include "contraction_lab/rates.hpp"
#include "contraction_lab/rng.hpp"
#include "contraction_lab/spectral.hpp"
