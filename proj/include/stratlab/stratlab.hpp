#pragma once

#include "stratlab/calculus.hpp"
#include "stratlab/config.hpp"
#include "stratlab/cutoffs.hpp"
#include "stratlab/errors.hpp"
#include "stratlab/format.hpp"
#include "stratlab/grid.hpp"
#include "stratlab/group.hpp"
#include "stratlab/lab.hpp"
#include "stratlab/norms.hpp"
#include "stratlab/report.hpp"
#include "stratlab/runner.hpp"
#include "stratlab/spectral.hpp"
#include "stratlab/stepping.hpp"
#include "stratlab/weights.hpp"
