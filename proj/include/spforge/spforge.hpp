#pragma once

#include "spforge/classifier.hpp"
#include "spforge/datasets.hpp"
#include "spforge/encoders.hpp"
#include "spforge/engine.hpp"
#include "spforge/error.hpp"
#include "spforge/experiments.hpp"
#include "spforge/features.hpp"
#include "spforge/init_stats.hpp"
#include "spforge/params.hpp"
#include "spforge/sdr.hpp"
#include "spforge/state.hpp"
#include "spforge/theory.hpp"
