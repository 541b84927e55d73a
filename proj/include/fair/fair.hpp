#pragma once

#include "fair/adversary.hpp"
#include "fair/aggregation.hpp"
#include "fair/config.hpp"
#include "fair/errors.hpp"
#include "fair/fuzzy.hpp"
#include "fair/qoi.hpp"
#include "fair/report.hpp"
#include "fair/simulator.hpp"
#include "fair/stats.hpp"
#include "fair/topology.hpp"
