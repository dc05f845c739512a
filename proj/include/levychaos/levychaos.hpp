#pragma once

#include "levychaos/common.hpp"
#include "levychaos/jacobi.hpp"
#include "levychaos/lattice.hpp"
#include "levychaos/levy_model.hpp"
#include "levychaos/multi_index.hpp"
#include "levychaos/quadrature.hpp"
#include "levychaos/recurrence_table.hpp"
#include "levychaos/rng.hpp"
#include "levychaos/simulate.hpp"
#include "levychaos/special.hpp"
#include "levychaos/suites.hpp"
#include "levychaos/wick.hpp"
