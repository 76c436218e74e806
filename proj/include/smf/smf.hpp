#pragma once

#include "hypercomplex.hpp"
#include "signals.hpp"
#include "classic.hpp"
#include "smcore.hpp"
#include "robustness.hpp"
#include "hcfilters.hpp"
#include "partialupdate.hpp"
#include "sparse.hpp"
#include "feature.hpp"
#include "harness.hpp"
