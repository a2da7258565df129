/*
 * Copyright 2026 The randalloc Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RANDALLOC_CORE_LOG_HPP_
#define RANDALLOC_CORE_LOG_HPP_

#include <spdlog/logger.h>

namespace randalloc {

// Library logger. Writes to stderr without timestamps so that captured
// output stays reproducible; level defaults to info.
spdlog::logger& logger();

}  // namespace randalloc

#endif  // RANDALLOC_CORE_LOG_HPP_
