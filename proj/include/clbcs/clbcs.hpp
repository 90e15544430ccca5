// Copyright 2026 The clbcs Authors
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

#include "clbcs/error.hpp"
#include "clbcs/estimator.hpp"
#include "clbcs/experiment.hpp"
#include "clbcs/observable.hpp"
#include "clbcs/pauli.hpp"
#include "clbcs/rng.hpp"
#include "clbcs/schemes.hpp"
#include "clbcs/simulator.hpp"
#include "clbcs/summation.hpp"
#include "clbcs/training.hpp"
#include "clbcs/variance.hpp"
