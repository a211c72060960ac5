// Umbrella header.

#pragma once

#include "hawknet/benchfns.hpp"
#include "hawknet/io.hpp"
#include "hawknet/linalg.hpp"
#include "hawknet/nn/adam.hpp"
#include "hawknet/nn/fenn.hpp"
#include "hawknet/nn/init.hpp"
#include "hawknet/nn/layers.hpp"
#include "hawknet/nn/loss.hpp"
#include "hawknet/nn/network.hpp"
#include "hawknet/optimizer.hpp"
#include "hawknet/pipeline/cv.hpp"
#include "hawknet/pipeline/dataset_io.hpp"
#include "hawknet/pipeline/hpo.hpp"
#include "hawknet/pipeline/metrics.hpp"
#include "hawknet/pipeline/signal.hpp"
#include "hawknet/pipeline/synthetic.hpp"
#include "hawknet/pipeline/train.hpp"
#include "hawknet/results.hpp"
#include "hawknet/rng.hpp"
#include "hawknet/stats.hpp"
