// Copyright 2026 the pawlab authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "pawlab/clockwork.hpp"
#include "pawlab/gravity.hpp"
#include "pawlab/hilbert.hpp"
#include "pawlab/multitime.hpp"
#include "pawlab/paw.hpp"
#include "pawlab/spacetime.hpp"
#include "pawlab/typicality.hpp"
#include "pawlab/version.hpp"
#include "pawlab/wootters.hpp"
