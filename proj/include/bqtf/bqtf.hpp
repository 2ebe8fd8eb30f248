#pragma once

#include "bqtf/bench.hpp"
#include "bqtf/dists.hpp"
#include "bqtf/gibbs.hpp"
#include "bqtf/graph.hpp"
#include "bqtf/io.hpp"
#include "bqtf/model.hpp"
#include "bqtf/parallel.hpp"
#include "bqtf/posterior.hpp"
#include "bqtf/rng.hpp"
#include "bqtf/simgen.hpp"
#include "bqtf/vb.hpp"
