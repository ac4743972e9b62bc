//
// Copyright 2026 The dpem Authors
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
//

#ifndef DPEM_DPEM_HPP_
#define DPEM_DPEM_HPP_

#include "dpem/em_engine.hpp"
#include "dpem/errors.hpp"
#include "dpem/harness/classification.hpp"
#include "dpem/harness/config_io.hpp"
#include "dpem/harness/experiment.hpp"
#include "dpem/harness/results_io.hpp"
#include "dpem/mechanisms.hpp"
#include "dpem/models.hpp"
#include "dpem/oracle.hpp"
#include "dpem/vector_ops.hpp"

#endif  // DPEM_DPEM_HPP_
