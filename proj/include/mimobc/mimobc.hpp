// SPDX-License-Identifier: Apache-2.0
//
// mimobc - high-SNR rate analysis of the MIMO broadcast channel
// Copyright (C) 2026 The mimobc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MIMOBC_MIMOBC_HPP
#define MIMOBC_MIMOBC_HPP

#include "core.hpp"
#include "system_channel.hpp"
#include "monte_carlo.hpp"
#include "mac_analysis.hpp"
#include "bc_duality.hpp"
#include "ergodic_analysis.hpp"
#include "capacity_baseline.hpp"

#endif
