#ifndef GHOM_GHOM_HPP
#define GHOM_GHOM_HPP

#include "ghom/bench.hpp"
#include "ghom/csv.hpp"
#include "ghom/error.hpp"
#include "ghom/geom_core.hpp"
#include "ghom/metrics.hpp"
#include "ghom/pipeline.hpp"
#include "ghom/polysolve.hpp"
#include "ghom/random.hpp"
#include "ghom/robust.hpp"
#include "ghom/solvers.hpp"
#include "ghom/synth.hpp"

#endif // GHOM_GHOM_HPP
