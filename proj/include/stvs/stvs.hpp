// Copyright (c) 2026 The STVS Authors. All Rights Reserved.
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

#include "stvs/attention.hpp"
#include "stvs/autograd.hpp"
#include "stvs/bench.hpp"
#include "stvs/clip.hpp"
#include "stvs/config_json.hpp"
#include "stvs/eval.hpp"
#include "stvs/image_io.hpp"
#include "stvs/metrics.hpp"
#include "stvs/network.hpp"
#include "stvs/nn_ops.hpp"
#include "stvs/parallel.hpp"
#include "stvs/reference.hpp"
#include "stvs/rng.hpp"
#include "stvs/selftest.hpp"
#include "stvs/temporal_module.hpp"
#include "stvs/tensor.hpp"
#include "stvs/trace.hpp"
#include "stvs/train.hpp"
#include "stvs/weight_store.hpp"
