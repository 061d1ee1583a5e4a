// Copyright 2026 The slicekit Authors
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

#include "slicekit/bounds.hpp"
#include "slicekit/core.hpp"
#include "slicekit/distribution.hpp"
#include "slicekit/elimination.hpp"
#include "slicekit/graph.hpp"
#include "slicekit/local_function.hpp"
#include "slicekit/numeric.hpp"
#include "slicekit/samplers.hpp"
#include "slicekit/tightness.hpp"
#include "slicekit/verify.hpp"
