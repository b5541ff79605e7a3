#pragma once

#include "zomd/errors.hpp"
#include "zomd/estimators.hpp"
#include "zomd/experiment.hpp"
#include "zomd/oracle.hpp"
#include "zomd/parallel.hpp"
#include "zomd/problems.hpp"
#include "zomd/rng.hpp"
#include "zomd/sampling.hpp"
#include "zomd/solver.hpp"
#include "zomd/stats.hpp"
#include "zomd/verify.hpp"
