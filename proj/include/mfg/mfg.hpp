// Copyright 2026 The mfglab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// Umbrella header for the whole library.

#include "mfg/errors.hpp"
#include "mfg/rng.hpp"
#include "mfg/parallel.hpp"
#include "mfg/time_grid.hpp"
#include "mfg/grids.hpp"
#include "mfg/game.hpp"
#include "mfg/control.hpp"
#include "mfg/catalog.hpp"
#include "mfg/brownian.hpp"
#include "mfg/simulate.hpp"
#include "mfg/stats.hpp"
#include "mfg/flow.hpp"
#include "mfg/metrics.hpp"
#include "mfg/hjb.hpp"
#include "mfg/mfe.hpp"
#include "mfg/nash_gap.hpp"
#include "mfg/markov_projection.hpp"
#include "mfg/relaxed.hpp"
#include "mfg/csv.hpp"
#include "mfg/svg.hpp"
#include "mfg/report.hpp"
#include "mfg/scenarios.hpp"
#include "mfg/operations.hpp"
#include "mfg/config.hpp"
