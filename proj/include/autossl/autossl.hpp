#pragma once

#include "autossl/cluster.hpp"
#include "autossl/cmaes.hpp"
#include "autossl/encoder.hpp"
#include "autossl/error.hpp"
#include "autossl/eval.hpp"
#include "autossl/graph.hpp"
#include "autossl/graph_io.hpp"
#include "autossl/numeric.hpp"
#include "autossl/rng.hpp"
#include "autossl/search_ds.hpp"
#include "autossl/search_es.hpp"
#include "autossl/tasks.hpp"
#include "autossl/theory.hpp"
#include "autossl/training.hpp"
#include "autossl/trajectory.hpp"
