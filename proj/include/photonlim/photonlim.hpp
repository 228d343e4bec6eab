/* Copyright 2026 The photonlim Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

// Everything in the library. The io/ headers (CSV, SVG, scenarios) pull in
// the vendored JSON parser and are included separately.

#include "analytic_bounds.hpp"
#include "drive.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "interp.hpp"
#include "model.hpp"
#include "optimizer.hpp"
#include "projection.hpp"
#include "roots.hpp"
#include "spectral.hpp"
