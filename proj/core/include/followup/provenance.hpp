// Copyright 2026 The followup-extractor Authors
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

#ifndef FOLLOWUP_PROVENANCE_HPP_
#define FOLLOWUP_PROVENANCE_HPP_

#include <cstdint>
#include <string>

#include "json.hpp"

namespace followup {

std::string tool_version();

// FNV-1a digest of a JSON value's compact dump, hex-encoded.
std::string config_digest(const nlohmann::ordered_json& config);

// Standard provenance header embedded at the top of every output artifact:
// tool version, config hash, and the seeds that produced it.
nlohmann::ordered_json make_provenance(const nlohmann::ordered_json& config,
                                       const nlohmann::ordered_json& seeds);

}  // namespace followup

#endif  // FOLLOWUP_PROVENANCE_HPP_
