// Copyright 2026 The geopipe Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header for the library (everything except the command line).

#ifndef GEOPIPE_GEOPIPE_HPP_
#define GEOPIPE_GEOPIPE_HPP_

#include "geopipe/calibration.hpp"
#include "geopipe/core_model.hpp"
#include "geopipe/error.hpp"
#include "geopipe/optimizer.hpp"
#include "geopipe/schedule.hpp"
#include "geopipe/simulator.hpp"
#include "geopipe/trace.hpp"

#endif  // GEOPIPE_GEOPIPE_HPP_
