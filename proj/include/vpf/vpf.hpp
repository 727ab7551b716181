// Copyright 2026 The VPF Authors
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

#include "vpf/common.hpp"
#include "vpf/csv.hpp"
#include "vpf/schema.hpp"
#include "vpf/config.hpp"
#include "vpf/text.hpp"
#include "vpf/ingest.hpp"
#include "vpf/features.hpp"
#include "vpf/split.hpp"
#include "vpf/tree.hpp"
#include "vpf/eval.hpp"
#include "vpf/models.hpp"
#include "vpf/explain.hpp"
#include "vpf/synthetic.hpp"
#include "vpf/pipeline.hpp"
