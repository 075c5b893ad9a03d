#pragma once

#include "cma/analysis.hpp"
#include "cma/automaton.hpp"
#include "cma/cluster.hpp"
#include "cma/error.hpp"
#include "cma/fluents.hpp"
#include "cma/json_io.hpp"
#include "cma/lingua.hpp"
#include "cma/memory.hpp"
#include "cma/menagerie.hpp"
#include "cma/scales.hpp"
