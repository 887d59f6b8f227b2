// Copyright 2026 The ftmpc Authors
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

#ifndef FTMPC_FTMPC_HPP_
#define FTMPC_FTMPC_HPP_

#include "ftmpc/degradation.hpp"
#include "ftmpc/dynamics.hpp"
#include "ftmpc/linearize.hpp"
#include "ftmpc/mpc.hpp"
#include "ftmpc/plant.hpp"
#include "ftmpc/qp.hpp"
#include "ftmpc/report.hpp"
#include "ftmpc/scenario.hpp"
#include "ftmpc/sim.hpp"
#include "ftmpc/trajectory.hpp"
#include "ftmpc/wheelslip.hpp"

#endif  // FTMPC_FTMPC_HPP_
