#pragma once

#include "wigmore/bayesnet.hpp"
#include "wigmore/chart.hpp"
#include "wigmore/compile.hpp"
#include "wigmore/error.hpp"
#include "wigmore/format.hpp"
#include "wigmore/lr.hpp"
#include "wigmore/sensitivity.hpp"
