// Copyright 2026 nestmatch Contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NESTMATCH_BALL_TABLE_H
#define NESTMATCH_BALL_TABLE_H

#include <array>
#include <cstdint>
#include <memory>

#include "absl/container/flat_hash_map.h"
#include "nestmatch/nest.h"

namespace nm {

/// Sparse map from ball id to T, stored in lazily allocated pages of consecutive ids.
/// Lattice ball ids are ordered (t, y, x), so balls that are close in the nest usually
/// share a page and often a cache line. Absent entries read as T{}.
template <typename T, unsigned PageBits = 12>
class BallTable {
   public:
    static constexpr std::size_t kPageSize = std::size_t{1} << PageBits;

    /// Entry for `b`, allocating its page on first use.
    T& operator[](BallId b) {
        Page* page = find_page(b >> PageBits);
        if (!page) {
            auto& slot = pages_[b >> PageBits];
            slot = std::make_unique<Page>();
            page = slot.get();
            last_key_ = b >> PageBits;
            last_ = page;
        }
        return (*page)[b & (kPageSize - 1)];
    }

    /// Entry for `b`, or nullptr when its page was never allocated.
    const T* find(BallId b) const {
        const Page* page = find_page(b >> PageBits);
        return page ? &(*page)[b & (kPageSize - 1)] : nullptr;
    }

    void clear() {
        pages_.clear();
        last_ = nullptr;
    }

   private:
    using Page = std::array<T, kPageSize>;

    Page* find_page(std::uint32_t key) const {
        if (last_ && last_key_ == key) return last_;
        auto it = pages_.find(key);
        if (it == pages_.end()) return nullptr;
        last_key_ = key;
        last_ = it->second.get();
        return last_;
    }

    absl::flat_hash_map<std::uint32_t, std::unique_ptr<Page>> pages_;
    mutable std::uint32_t last_key_ = 0;
    mutable Page* last_ = nullptr;
};

}  // namespace nm

#endif  // NESTMATCH_BALL_TABLE_H
