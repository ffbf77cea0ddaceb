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

#include <stdexcept>
#include <string>
#include <string_view>

namespace fabsim {

/// Error categories raised by the simulator. The numeric values are part of
/// the C ABI (see c_api.h) and must stay stable.
enum class ErrorCode : int {
    ok = 0,
    alignment = 1,
    range = 2,
    overlap = 3,
    duplicate_attach = 4,
    unknown_port = 5,
    fan_in_conflict = 6,
    fan_out_conflict = 7,
    timeout = 8,
    image_too_small = 9,
    dimension_mismatch = 10,
    precondition = 11,
    port_direction_mismatch = 12,
    busy = 13,
    length_mismatch = 14,
    parse = 15,
    validation = 16,
    io = 17,
    unknown_endpoint = 18,
    format = 19,
    missing_baseline = 20,
    digest_mismatch = 21,
    config_unavailable = 22,
    closed_handle = 23,
    invalid_argument = 24,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) { }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace fabsim
