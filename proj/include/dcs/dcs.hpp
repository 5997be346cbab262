// Copyright 2026 The dcs Authors
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


// Umbrella header.

#ifndef DCS_DCS_HPP
#define DCS_DCS_HPP

#include "dcs/channel.hpp"
#include "dcs/common.hpp"
#include "dcs/estimate.hpp"
#include "dcs/exact.hpp"
#include "dcs/fit.hpp"
#include "dcs/freefermion.hpp"
#include "dcs/io.hpp"
#include "dcs/pauli.hpp"
#include "dcs/rdpert.hpp"
#include "dcs/stab.hpp"

#endif
