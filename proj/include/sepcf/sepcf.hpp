#pragma once

#include "sepcf/constraints.hpp"
#include "sepcf/errors.hpp"
#include "sepcf/features.hpp"
#include "sepcf/fidelity.hpp"
#include "sepcf/forest.hpp"
#include "sepcf/genetic.hpp"
#include "sepcf/ingest.hpp"
#include "sepcf/metrics.hpp"
#include "sepcf/reconstruct.hpp"
#include "sepcf/rng.hpp"
#include "sepcf/serialize.hpp"
#include "sepcf/series.hpp"
