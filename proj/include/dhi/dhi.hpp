#pragma once

#include "dhi/entropy.hpp"
#include "dhi/error.hpp"
#include "dhi/group.hpp"
#include "dhi/permutation.hpp"
#include "dhi/report.hpp"
#include "dhi/rng.hpp"
#include "dhi/sampling.hpp"
#include "dhi/survey.hpp"
