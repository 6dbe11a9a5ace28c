#pragma once

#include "spikes/error.hpp"
#include "spikes/intensity.hpp"
#include "spikes/io.hpp"
#include "spikes/kernel.hpp"
#include "spikes/montecarlo.hpp"
#include "spikes/parallel.hpp"
#include "spikes/point_process.hpp"
#include "spikes/quadrature.hpp"
#include "spikes/rational.hpp"
#include "spikes/renewal.hpp"
#include "spikes/rng.hpp"
#include "spikes/scoring.hpp"
#include "spikes/sieve.hpp"
#include "spikes/spike_train.hpp"
#include "spikes/tables.hpp"
#include "spikes/tilt.hpp"
