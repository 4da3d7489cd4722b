#pragma once

#include "comet/bench.hpp"
#include "comet/dataset.hpp"
#include "comet/estseq.hpp"
#include "comet/mapping.hpp"
#include "comet/problem.hpp"
#include "comet/prox.hpp"
#include "comet/reference.hpp"
#include "comet/rng.hpp"
#include "comet/solvers.hpp"
#include "comet/types.hpp"
