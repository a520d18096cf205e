/*
 *
 * Copyright 2026 dbpaisa-sim authors
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
 *
 */

#ifndef DBPAISA_HEX_H_
#define DBPAISA_HEX_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dbpaisa {

std::string to_hex(std::span<const uint8_t> bytes);

// Lowercase and uppercase digits accepted; whitespace is not.
std::optional<std::vector<uint8_t>> from_hex(std::string_view hex);

}  // namespace dbpaisa

#endif  // DBPAISA_HEX_H_
