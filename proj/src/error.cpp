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

#include "fabsim/error.hpp"

namespace fabsim {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::alignment: return "alignment-error";
    case ErrorCode::range: return "range-error";
    case ErrorCode::overlap: return "overlap-error";
    case ErrorCode::duplicate_attach: return "duplicate-attach";
    case ErrorCode::unknown_port: return "unknown-port";
    case ErrorCode::fan_in_conflict: return "fan-in-conflict";
    case ErrorCode::fan_out_conflict: return "fan-out-conflict";
    case ErrorCode::timeout: return "timeout-error";
    case ErrorCode::image_too_small: return "image-too-small";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::precondition: return "precondition-violation";
    case ErrorCode::port_direction_mismatch: return "port-direction-mismatch";
    case ErrorCode::busy: return "busy-error";
    case ErrorCode::length_mismatch: return "length-mismatch";
    case ErrorCode::parse: return "parse-error";
    case ErrorCode::validation: return "validation-error";
    case ErrorCode::io: return "io-error";
    case ErrorCode::unknown_endpoint: return "unknown-endpoint";
    case ErrorCode::format: return "format-error";
    case ErrorCode::missing_baseline: return "missing-baseline";
    case ErrorCode::digest_mismatch: return "digest-mismatch";
    case ErrorCode::config_unavailable: return "config-unavailable";
    case ErrorCode::closed_handle: return "closed-handle";
    case ErrorCode::invalid_argument: return "invalid-argument";
    }
    return "unknown-error";
}

} // namespace fabsim
