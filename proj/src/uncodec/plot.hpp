// Copyright 2026 The uncodec Authors. All Rights Reserved.
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

#include <string>
#include <vector>

#include "uncodec/evaluation.hpp"
#include "uncodec/png_io.hpp"

namespace uncodec {

/// RD curves (PSNR over bpp) drawn into an RGB raster: axes with ticks and
/// numeric tick labels, one colored polyline with point markers per curve.
Image8 render_rd_plot(const std::vector<RDCurve>& curves, int width = 640, int height = 480);

void write_rd_plot(const std::string& path, const std::vector<RDCurve>& curves);

}  // namespace uncodec
