#pragma once

#include "outcome_forge/cohort.hpp"
#include "outcome_forge/errors.hpp"
#include "outcome_forge/eval.hpp"
#include "outcome_forge/learners.hpp"
#include "outcome_forge/log.hpp"
#include "outcome_forge/parallel.hpp"
#include "outcome_forge/random.hpp"
#include "outcome_forge/report.hpp"
#include "outcome_forge/resample.hpp"
