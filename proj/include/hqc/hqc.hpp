// Copyright 2026 The hqc Authors
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

// Umbrella header for the whole toolkit.

#include "hqc/circuit.hpp"
#include "hqc/dispatch.hpp"
#include "hqc/hhl.hpp"
#include "hqc/knit.hpp"
#include "hqc/maxcut.hpp"
#include "hqc/mps.hpp"
#include "hqc/qasm.hpp"
#include "hqc/rng.hpp"
#include "hqc/scheduler.hpp"
#include "hqc/statevector.hpp"
