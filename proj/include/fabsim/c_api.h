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

#ifndef FABSIM_C_API_H
#define FABSIM_C_API_H

/* C interface of the overlay simulator, for foreign-function bindings.
 *
 * Every function returns 0 (FABSIM_OK) or one of the error codes below. The
 * message of the most recent failure on the calling thread is available from
 * fabsim_last_error(). Handles are positive integers; a released handle is
 * never reused and using it yields FABSIM_ERR_CLOSED_HANDLE. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define FABSIM_ABI_VERSION 1

enum {
    FABSIM_OK = 0,
    FABSIM_ERR_ALIGNMENT = 1,
    FABSIM_ERR_RANGE = 2,
    FABSIM_ERR_OVERLAP = 3,
    FABSIM_ERR_DUPLICATE_ATTACH = 4,
    FABSIM_ERR_UNKNOWN_PORT = 5,
    FABSIM_ERR_FAN_IN_CONFLICT = 6,
    FABSIM_ERR_FAN_OUT_CONFLICT = 7,
    FABSIM_ERR_TIMEOUT = 8,
    FABSIM_ERR_IMAGE_TOO_SMALL = 9,
    FABSIM_ERR_DIMENSION_MISMATCH = 10,
    FABSIM_ERR_PRECONDITION = 11,
    FABSIM_ERR_PORT_DIRECTION_MISMATCH = 12,
    FABSIM_ERR_BUSY = 13,
    FABSIM_ERR_LENGTH_MISMATCH = 14,
    FABSIM_ERR_PARSE = 15,
    FABSIM_ERR_VALIDATION = 16,
    FABSIM_ERR_IO = 17,
    FABSIM_ERR_UNKNOWN_ENDPOINT = 18,
    FABSIM_ERR_FORMAT = 19,
    FABSIM_ERR_MISSING_BASELINE = 20,
    FABSIM_ERR_DIGEST_MISMATCH = 21,
    FABSIM_ERR_CONFIG_UNAVAILABLE = 22,
    FABSIM_ERR_CLOSED_HANDLE = 23,
    FABSIM_ERR_INVALID_ARGUMENT = 24
};

typedef int32_t fabsim_handle;

typedef struct fabsim_completion {
    uint64_t bytes_moved;
    double simulated_seconds;
    uint64_t start_cycle;
    uint64_t end_cycle;
    uint64_t stall_cycles;
} fabsim_completion;

typedef struct fabsim_traffic {
    uint64_t transfers;
    uint64_t bytes_from_host;
    uint64_t bytes_to_host;
} fabsim_traffic;

int fabsim_abi_version(void);

/* Loads an overlay descriptor file. */
int fabsim_overlay_load(const char* path, fabsim_handle* out);
int fabsim_overlay_release(fabsim_handle handle);

/* Current descriptor as YAML text. Writes at most `capacity` bytes including
 * the terminating NUL; `needed` receives the full size including the NUL.
 * Call with capacity 0 to query the size. */
int fabsim_overlay_describe(fabsim_handle handle, char* buffer, size_t capacity, size_t* needed);

/* Word access through a window [base, base + length) that must lie inside one
 * mapped register region. `offset` is relative to base. */
int fabsim_mmio_read(fabsim_handle handle, uint64_t base, uint64_t length, uint64_t offset, uint32_t* value);
int fabsim_mmio_write(fabsim_handle handle, uint64_t base, uint64_t length, uint64_t offset, uint32_t value);

/* Absolute address of the route register of a consumer endpoint. */
int fabsim_route_register(fabsim_handle handle, const char* consumer, uint64_t* address);
int fabsim_reconfigure_route(fabsim_handle handle, const char* producer, const char* consumer);

/* Starts a transfer on a named channel. The buffer is read (host-to-fabric) or
 * written (fabric-to-host) in place and must stay valid until the ticket has
 * been waited on. */
int fabsim_dma_transfer(fabsim_handle handle, const char* channel, uint8_t* buffer, size_t length,
                        uint64_t* ticket);
/* Steps the fabric until the transfer completes. Waiting twice on one ticket
 * returns the same record. */
int fabsim_dma_wait(fabsim_handle handle, uint64_t ticket, uint64_t max_cycles, fabsim_completion* out);

int fabsim_fabric_cycle(fabsim_handle handle, uint64_t* cycle);
int fabsim_fabric_clock_hz(fabsim_handle handle, double* hz);
int fabsim_memory_traffic(fabsim_handle handle, fabsim_traffic* out);

/* Register file contents, sorted by address. `count` receives the number of
 * stored words; at most `capacity` pairs are written. */
int fabsim_register_snapshot(fabsim_handle handle, uint64_t* addresses, uint32_t* values, size_t capacity,
                             size_t* count);

/* Host-side optimized edge detector. `out` holds width * height bytes. */
int fabsim_edge_detect_optimized(const uint8_t* pixels, int32_t width, int32_t height, int32_t threshold,
                                 int32_t threads, uint8_t* out);

/* Lower-case hex SHA-256; `out` holds at least 65 bytes. */
int fabsim_digest(const uint8_t* bytes, size_t length, char* out);

const char* fabsim_last_error(void);
/* Stable name of an error code, e.g. "alignment-error". */
const char* fabsim_error_name(int code);

#ifdef __cplusplus
}
#endif

#endif
