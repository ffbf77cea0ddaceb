/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#pragma once

#include "fabsim/image.hpp"

#include <cstdint>
#include <span>
#include <string>

namespace fabsim {

/// Lower-case hex SHA-256 of the bytes.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

inline std::string digest_of(const EdgeMap& map) {
    return sha256_hex(map.samples());
}

} // namespace fabsim
