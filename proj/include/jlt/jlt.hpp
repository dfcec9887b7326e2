#pragma once

#include "jlt/error.hpp"
#include "jlt/special.hpp"
#include "jlt/jacobi.hpp"
#include "jlt/io.hpp"
#include "jlt/tridiagonal.hpp"
#include "jlt/spectrum.hpp"
#include "jlt/quadrature.hpp"
#include "jlt/functional.hpp"
#include "jlt/commutation.hpp"
#include "jlt/verify.hpp"
#include "jlt/continuum.hpp"
#include "jlt/report.hpp"
