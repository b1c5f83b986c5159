// Copyright 2026 The lambdarc Authors
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

#pragma once

#include "lambdarc/allocation.hpp"
#include "lambdarc/controller.hpp"
#include "lambdarc/csv.hpp"
#include "lambdarc/fitting.hpp"
#include "lambdarc/gop.hpp"
#include "lambdarc/metrics.hpp"
#include "lambdarc/model.hpp"
#include "lambdarc/numeric.hpp"
#include "lambdarc/rng.hpp"
#include "lambdarc/simulator.hpp"
#include "lambdarc/update.hpp"

namespace lambdarc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lambdarc
