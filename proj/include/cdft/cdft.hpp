#pragma once

#include "cdft/audit.hpp"
#include "cdft/config.hpp"
#include "cdft/convex_lab.hpp"
#include "cdft/coulomb.hpp"
#include "cdft/density.hpp"
#include "cdft/detbuilder.hpp"
#include "cdft/errors.hpp"
#include "cdft/field_io.hpp"
#include "cdft/functionals.hpp"
#include "cdft/grid.hpp"
#include "cdft/report.hpp"
#include "cdft/samplers.hpp"
#include "cdft/toy_solver.hpp"
#include "cdft/version.hpp"
