/*
 * Copyright 2026 metersim authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "metersim/analysis.hpp"
#include "metersim/capture.hpp"
#include "metersim/config.hpp"
#include "metersim/framecodec.hpp"
#include "metersim/keyvalue.hpp"
#include "metersim/metercore.hpp"
#include "metersim/ptpsync.hpp"
#include "metersim/simclock.hpp"
#include "metersim/simulate.hpp"
#include "metersim/time.hpp"
#include "metersim/waveform.hpp"
