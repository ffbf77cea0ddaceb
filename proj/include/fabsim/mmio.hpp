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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fabsim {

using Address = std::uint64_t;
using Word = std::uint32_t;

inline constexpr Address kWordBytes = 4;

struct Region {
    Address base = 0;
    Address length = 0;
    std::string owner;

    Address end() const noexcept { return base + length; }
    bool operator==(const Region&) const = default;
};

struct RegionHandle {
    std::size_t index = 0;
    bool operator==(const RegionHandle&) const = default;
};

/// Non-overlapping, word-aligned byte regions of the fabric control space.
class AddressMap {
public:
    /// Throws alignment-error for a misaligned base/length and overlap-error
    /// when the new region intersects an existing one.
    RegionHandle map_region(Address base, Address length, std::string owner);

    const Region& region(RegionHandle handle) const;
    const std::vector<Region>& regions() const noexcept { return regions_; }

    /// Region containing `address`, if any.
    const Region* find(Address address) const noexcept;
    std::optional<RegionHandle> handle_for(Address address) const noexcept;

private:
    std::vector<Region> regions_;
};

/// Word storage keyed by absolute byte address. Unwritten words read as the
/// reset value.
class RegisterFile {
public:
    explicit RegisterFile(Word reset_value = 0) : reset_value_(reset_value) { }

    Word read(Address address) const noexcept;
    void write(Address address, Word value);

    Word reset_value() const noexcept { return reset_value_; }
    const std::map<Address, Word>& storage() const noexcept { return storage_; }

    bool operator==(const RegisterFile&) const = default;

private:
    Word reset_value_;
    std::map<Address, Word> storage_;
};

using RegisterSnapshot = std::map<Address, Word>;

/// The memory-mapped control space: an address map plus the registers behind it.
/// Mutation is single-writer; concurrent const access is safe.
class MmioSpace {
public:
    explicit MmioSpace(Word reset_value = 0) : registers_(reset_value) { }

    RegionHandle map_region(Address base, Address length, std::string owner) {
        return map_.map_region(base, length, std::move(owner));
    }

    /// `offset` is relative to the region base; it must be word-aligned and
    /// offset + 4 must not exceed the region length.
    void write(RegionHandle region, Address offset, Word value);
    Word read(RegionHandle region, Address offset) const;

    const AddressMap& address_map() const noexcept { return map_; }
    const RegisterFile& registers() const noexcept { return registers_; }
    RegisterSnapshot snapshot() const { return registers_.storage(); }

    /// Bumped on every write; lets components skip re-reading unchanged registers.
    std::uint64_t generation() const noexcept { return generation_; }

private:
    Address checked_address(RegionHandle region, Address offset) const;

    AddressMap map_;
    RegisterFile registers_;
    std::uint64_t generation_ = 0;
};

} // namespace fabsim
