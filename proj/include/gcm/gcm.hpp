#pragma once

#include "gcm/errors.hpp"
#include "gcm/estimation.hpp"
#include "gcm/experiment.hpp"
#include "gcm/graph.hpp"
#include "gcm/junction_tree.hpp"
#include "gcm/mrf.hpp"
#include "gcm/parallel.hpp"
#include "gcm/population.hpp"
#include "gcm/rng.hpp"
#include "gcm/sampling.hpp"
