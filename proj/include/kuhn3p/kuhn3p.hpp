#pragma once

#include "kuhn3p/branch_csv.hpp"
#include "kuhn3p/continuation.hpp"
#include "kuhn3p/frames.hpp"
#include "kuhn3p/game_tree.hpp"
#include "kuhn3p/reach.hpp"
#include "kuhn3p/regularizer.hpp"
#include "kuhn3p/residual_system.hpp"
#include "kuhn3p/skp.hpp"
#include "kuhn3p/svg_plot.hpp"
#include "kuhn3p/terms.hpp"
#include "kuhn3p/verify.hpp"
