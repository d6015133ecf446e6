/*
 * Copyright 2026 The mfdespeckle Authors
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

// Umbrella header.
#include "mfd/baselines.hpp"
#include "mfd/config.hpp"
#include "mfd/deconv.hpp"
#include "mfd/denoise.hpp"
#include "mfd/envelope.hpp"
#include "mfd/error.hpp"
#include "mfd/experiment.hpp"
#include "mfd/fft.hpp"
#include "mfd/image.hpp"
#include "mfd/image_io.hpp"
#include "mfd/mads.hpp"
#include "mfd/metrics.hpp"
#include "mfd/msne.hpp"
#include "mfd/phantom.hpp"
#include "mfd/plot.hpp"
#include "mfd/postproc.hpp"
#include "mfd/reference.hpp"
#include "mfd/report.hpp"
#include "mfd/specklesim.hpp"
#include "mfd/synthetic.hpp"
