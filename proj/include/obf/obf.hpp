#pragma once

#include "obf/baselines.hpp"
#include "obf/bayes.hpp"
#include "obf/error.hpp"
#include "obf/harness.hpp"
#include "obf/rng.hpp"
#include "obf/selection.hpp"
#include "obf/special.hpp"
#include "obf/synthgen.hpp"
