// Copyright 2026 The vlproto Authors
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

#include "vlproto/error.hpp"
#include "vlproto/fixture.hpp"
#include "vlproto/interchange.hpp"
#include "vlproto/kmeans.hpp"
#include "vlproto/outlier.hpp"
#include "vlproto/pipeline.hpp"
#include "vlproto/rng.hpp"
#include "vlproto/stop_words.hpp"
#include "vlproto/sweep.hpp"
#include "vlproto/text.hpp"
