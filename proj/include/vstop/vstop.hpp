#ifndef VSTOP_VSTOP_HPP
#define VSTOP_VSTOP_HPP

#include "vstop/combination.hpp"
#include "vstop/core.hpp"
#include "vstop/dataset_io.hpp"
#include "vstop/evaluation.hpp"
#include "vstop/metrics.hpp"
#include "vstop/simulation.hpp"
#include "vstop/stopping.hpp"

#endif  // VSTOP_VSTOP_HPP
