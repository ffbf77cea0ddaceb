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

#include "fabsim/mmio.hpp"

#include "fabsim/error.hpp"

#include <cstdio>

namespace fabsim {

namespace {

std::string hex(Address a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(a));
    return buf;
}

} // namespace

RegionHandle AddressMap::map_region(Address base, Address length, std::string owner) {
    if (base % kWordBytes != 0 || length % kWordBytes != 0) {
        fail(ErrorCode::alignment, "region " + owner + " at " + hex(base) + " length " + hex(length) +
                                       " is not 4-byte aligned");
    }
    if (length == 0) {
        fail(ErrorCode::invalid_argument, "region " + owner + " has zero length");
    }
    if (base + length < base) {
        fail(ErrorCode::range, "region " + owner + " wraps the address space");
    }
    for (const Region& r : regions_) {
        if (base < r.end() && r.base < base + length) {
            fail(ErrorCode::overlap, "region " + owner + " at " + hex(base) + " overlaps " + r.owner +
                                         " at " + hex(r.base));
        }
    }
    regions_.push_back(Region{base, length, std::move(owner)});
    return RegionHandle{regions_.size() - 1};
}

const Region& AddressMap::region(RegionHandle handle) const {
    if (handle.index >= regions_.size()) {
        fail(ErrorCode::range, "unknown region handle");
    }
    return regions_[handle.index];
}

const Region* AddressMap::find(Address address) const noexcept {
    for (const Region& r : regions_) {
        if (address >= r.base && address < r.end()) {
            return &r;
        }
    }
    return nullptr;
}

std::optional<RegionHandle> AddressMap::handle_for(Address address) const noexcept {
    for (std::size_t i = 0; i < regions_.size(); ++i) {
        if (address >= regions_[i].base && address < regions_[i].end()) {
            return RegionHandle{i};
        }
    }
    return std::nullopt;
}

Word RegisterFile::read(Address address) const noexcept {
    auto it = storage_.find(address);
    return it == storage_.end() ? reset_value_ : it->second;
}

void RegisterFile::write(Address address, Word value) {
    if (address % kWordBytes != 0) {
        fail(ErrorCode::alignment, "register address " + hex(address) + " is not word-aligned");
    }
    storage_[address] = value;
}

Address MmioSpace::checked_address(RegionHandle region, Address offset) const {
    const Region& r = map_.region(region);
    if (offset % kWordBytes != 0) {
        fail(ErrorCode::alignment, "MMIO offset " + hex(offset) + " in " + r.owner + " is not 4-byte aligned");
    }
    if (offset >= r.length || r.length - offset < kWordBytes) {
        fail(ErrorCode::range, "MMIO offset " + hex(offset) + " outside " + r.owner + " (length " +
                                   hex(r.length) + ")");
    }
    return r.base + offset;
}

void MmioSpace::write(RegionHandle region, Address offset, Word value) {
    registers_.write(checked_address(region, offset), value);
    ++generation_;
}

Word MmioSpace::read(RegionHandle region, Address offset) const {
    return registers_.read(checked_address(region, offset));
}

} // namespace fabsim
