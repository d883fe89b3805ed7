#pragma once

// Everything in one include.

#include "thinset/bmo.hpp"
#include "thinset/codes.hpp"
#include "thinset/error.hpp"
#include "thinset/gaussian.hpp"
#include "thinset/matroid.hpp"
#include "thinset/parallel.hpp"
#include "thinset/quadrature.hpp"
#include "thinset/random.hpp"
#include "thinset/relations.hpp"
#include "thinset/riesz.hpp"
#include "thinset/spectrum.hpp"
#include "thinset/subgauss.hpp"
