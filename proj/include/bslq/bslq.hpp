/*
 Copyright 2026 The bslq Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Umbrella header for the solver library (everything except the CLI).

#pragma once

#include "bslq/core.hpp"
#include "bslq/paths.hpp"
#include "bslq/problem.hpp"
#include "bslq/ode.hpp"
#include "bslq/coefficients.hpp"
#include "bslq/riccati.hpp"
#include "bslq/reduction.hpp"
#include "bslq/affine_bsde.hpp"
#include "bslq/brownian.hpp"
#include "bslq/parallel.hpp"
#include "bslq/simulation.hpp"
#include "bslq/evaluation.hpp"
#include "bslq/oracle.hpp"
#include "bslq/scenario_io.hpp"
#include "bslq/verification.hpp"
