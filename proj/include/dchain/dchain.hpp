#pragma once
/// Umbrella header for the dchain library.

#include "chains.hpp"
#include "discrete_matrices.hpp"
#include "errors.hpp"
#include "exterior_algebra.hpp"
#include "expression.hpp"
#include "forms.hpp"
#include "homotopy.hpp"
#include "lp.hpp"
#include "maps.hpp"
#include "norms.hpp"
#include "operators.hpp"
