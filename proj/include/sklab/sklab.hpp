#ifndef SKLAB_SKLAB_HPP
#define SKLAB_SKLAB_HPP

#include "constants.hpp"
#include "enumerate.hpp"
#include "errors.hpp"
#include "extrapolation.hpp"
#include "ground_state.hpp"
#include "harness.hpp"
#include "io.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "rem.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "thermo.hpp"

#endif  // SKLAB_SKLAB_HPP
