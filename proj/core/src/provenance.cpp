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

#include "followup/provenance.hpp"

#include <cstdio>

#include "followup/rng.hpp"

namespace followup {

std::string tool_version() { return FOLLOWUP_VERSION; }

std::string config_digest(const nlohmann::ordered_json& config) {
  std::string dump = config.dump();
  std::uint64_t h = fnv1a64(dump.data(), dump.size());
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::ordered_json make_provenance(const nlohmann::ordered_json& config,
                                       const nlohmann::ordered_json& seeds) {
  nlohmann::ordered_json p;
  p["tool"] = "followup-extractor";
  p["version"] = tool_version();
  p["config_hash"] = config_digest(config);
  p["seeds"] = seeds;
  return p;
}

}  // namespace followup
