#pragma once

#include "proxkit/checks.hpp"
#include "proxkit/contraction.hpp"
#include "proxkit/dynamics.hpp"
#include "proxkit/experiment.hpp"
#include "proxkit/function.hpp"
#include "proxkit/metric.hpp"
#include "proxkit/minimizers.hpp"
#include "proxkit/parse.hpp"
#include "proxkit/prox.hpp"
#include "proxkit/report.hpp"
#include "proxkit/rng.hpp"
#include "proxkit/subdifferential.hpp"
