// Copyright 2026 The Intercomm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef INTERCOMM_JSON_FWD_H_
#define INTERCOMM_JSON_FWD_H_

#include "json.hpp"

namespace intercomm {

// Every file format written by this library keeps keys in insertion order.
using ordered_json = nlohmann::ordered_json;

}  // namespace intercomm

#endif  // INTERCOMM_JSON_FWD_H_
