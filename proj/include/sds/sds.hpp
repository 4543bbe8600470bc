#pragma once

#include "sds/checks.hpp"
#include "sds/closedform.hpp"
#include "sds/distributions.hpp"
#include "sds/engine.hpp"
#include "sds/errors.hpp"
#include "sds/isotonic.hpp"
#include "sds/parallel.hpp"
#include "sds/policies.hpp"
#include "sds/process.hpp"
#include "sds/random.hpp"
#include "sds/solver.hpp"
