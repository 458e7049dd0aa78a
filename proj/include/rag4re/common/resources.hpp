// Copyright (C) 2026 The rag4re Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#pragma once

#include <string_view>
#include <vector>

namespace rag4re {

// Data files under data/ compiled into the library. `name` is the path relative to data/,
// e.g. "inventories/tacred.json". Throws ValidationError for unknown names.
std::string_view builtin_resource(std::string_view name);
std::vector<std::string_view> builtin_resource_names();

}  // namespace rag4re
