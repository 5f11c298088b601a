#pragma once

#include "aggdiff/errors.hpp"
#include "aggdiff/quadrature.hpp"
#include "aggdiff/potentials.hpp"
#include "aggdiff/angular_kernels.hpp"
#include "aggdiff/erc.hpp"
#include "aggdiff/density.hpp"
#include "aggdiff/fields.hpp"
#include "aggdiff/solver.hpp"
#include "aggdiff/curves.hpp"
#include "aggdiff/io.hpp"
#include "aggdiff/config.hpp"
#include "aggdiff/cli.hpp"
