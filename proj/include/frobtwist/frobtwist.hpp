#pragma once

#include "frobtwist/ap_engine.hpp"
#include "frobtwist/arith.hpp"
#include "frobtwist/curve.hpp"
#include "frobtwist/data_pipeline.hpp"
#include "frobtwist/distribution.hpp"
#include "frobtwist/experiment.hpp"
#include "frobtwist/io.hpp"
#include "frobtwist/metrics.hpp"
#include "frobtwist/parallel.hpp"
#include "frobtwist/random.hpp"
#include "frobtwist/sign_matcher.hpp"
#include "frobtwist/twist_hash.hpp"

#define FROBTWIST_VERSION "0.1.0"
