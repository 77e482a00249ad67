#pragma once

#include "sfroute/analysis.hpp"
#include "sfroute/commands.hpp"
#include "sfroute/config.hpp"
#include "sfroute/dynamics.hpp"
#include "sfroute/graph.hpp"
#include "sfroute/parallel.hpp"
#include "sfroute/rng.hpp"
#include "sfroute/routing.hpp"
#include "sfroute/table.hpp"
