#pragma once

#include "pmbm/association.hpp"
#include "pmbm/bernoulli.hpp"
#include "pmbm/config.hpp"
#include "pmbm/exact_mbm.hpp"
#include "pmbm/filter.hpp"
#include "pmbm/gaussian.hpp"
#include "pmbm/metrics.hpp"
#include "pmbm/models.hpp"
#include "pmbm/ppp.hpp"
#include "pmbm/reform.hpp"
#include "pmbm/simulator.hpp"
#include "pmbm/types.hpp"
