#pragma once

#include "distance_kind.hpp"
#include "distances.hpp"
#include "epps_singleton.hpp"
#include "error.hpp"
#include "feature_matrix.hpp"
#include "least_squares.hpp"
#include "monitor.hpp"
#include "pca.hpp"
#include "resampling.hpp"
#include "rng.hpp"
#include "scope_model.hpp"
#include "scue.hpp"
#include "sdd.hpp"
#include "sorted_sample.hpp"
#include "stats.hpp"
