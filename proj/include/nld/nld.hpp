#pragma once

#include "nld/errors.hpp"
#include "nld/evolution.hpp"
#include "nld/kernel.hpp"
#include "nld/matrix_exponential.hpp"
#include "nld/nonlocal_operator.hpp"
#include "nld/space.hpp"
#include "nld/spectral.hpp"
