#pragma once

#include "hypmax/errors.hpp"
#include "hypmax/field.hpp"
#include "hypmax/geometry.hpp"
#include "hypmax/harness.hpp"
#include "hypmax/monte_carlo.hpp"
#include "hypmax/norms.hpp"
#include "hypmax/operators.hpp"
#include "hypmax/quadrature.hpp"
#include "hypmax/radial.hpp"
#include "hypmax/random.hpp"
#include "hypmax/report.hpp"
#include "hypmax/weights.hpp"
