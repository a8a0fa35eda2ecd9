#pragma once

#include "qpq/algorithms.hpp"
#include "qpq/baselines.hpp"
#include "qpq/bench.hpp"
#include "qpq/dataset.hpp"
#include "qpq/engine.hpp"
#include "qpq/gate_sim.hpp"
#include "qpq/ledger.hpp"
#include "qpq/qram.hpp"
#include "qpq/rng.hpp"
#include "qpq/validate.hpp"
