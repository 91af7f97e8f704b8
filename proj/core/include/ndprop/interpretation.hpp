// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace ndprop {

/// A subset of the atom universe [0, n), stored as a fixed-width bitset.
class Interpretation {
public:
    Interpretation() = default;
    explicit Interpretation(std::size_t universe)
        : n_(universe), words_((universe + 63) / 64, 0) {}

    static Interpretation full(std::size_t universe) {
        Interpretation s(universe);
        for (auto& w : s.words_) w = ~std::uint64_t{0};
        s.trim();
        return s;
    }

    /// Bit i of mask becomes atom i. Only meaningful for universes <= 64.
    static Interpretation from_mask(std::size_t universe, std::uint64_t mask) {
        assert(universe <= 64);
        Interpretation s(universe);
        if (universe > 0) words_front(s) = mask;
        s.trim();
        return s;
    }

    std::size_t universe_size() const { return n_; }

    bool contains(std::size_t i) const {
        assert(i < n_);
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }

    void insert(std::size_t i) {
        assert(i < n_);
        words_[i >> 6] |= std::uint64_t{1} << (i & 63);
    }

    void remove(std::size_t i) {
        assert(i < n_);
        words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
    }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    bool empty() const {
        for (auto w : words_)
            if (w) return false;
        return true;
    }

    bool subset_of(const Interpretation& other) const {
        assert(n_ == other.n_);
        for (std::size_t k = 0; k < words_.size(); ++k)
            if (words_[k] & ~other.words_[k]) return false;
        return true;
    }

    bool intersects(const Interpretation& other) const {
        assert(n_ == other.n_);
        for (std::size_t k = 0; k < words_.size(); ++k)
            if (words_[k] & other.words_[k]) return true;
        return false;
    }

    Interpretation united(const Interpretation& other) const {
        Interpretation r = *this;
        r.insert_all(other);
        return r;
    }

    Interpretation intersected(const Interpretation& other) const {
        assert(n_ == other.n_);
        Interpretation r = *this;
        for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] &= other.words_[k];
        return r;
    }

    Interpretation minus(const Interpretation& other) const {
        assert(n_ == other.n_);
        Interpretation r = *this;
        for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] &= ~other.words_[k];
        return r;
    }

    Interpretation complement() const {
        Interpretation r = *this;
        for (auto& w : r.words_) w = ~w;
        r.trim();
        return r;
    }

    void insert_all(const Interpretation& other) {
        assert(n_ == other.n_);
        for (std::size_t k = 0; k < words_.size(); ++k) words_[k] |= other.words_[k];
    }

    bool operator==(const Interpretation&) const = default;

    template <typename F>
    void for_each(F&& f) const {
        for (std::size_t k = 0; k < words_.size(); ++k) {
            std::uint64_t w = words_[k];
            while (w) {
                const int bit = std::countr_zero(w);
                f(k * 64 + static_cast<std::size_t>(bit));
                w &= w - 1;
            }
        }
    }

    std::vector<std::size_t> to_indices() const {
        std::vector<std::size_t> out;
        out.reserve(count());
        for_each([&](std::size_t i) { out.push_back(i); });
        return out;
    }

    std::uint64_t hash() const {
        std::uint64_t h = 0xcbf29ce484222325ull ^ n_;
        for (auto w : words_) {
            h ^= w;
            h *= 0x100000001b3ull;
        }
        return h;
    }

private:
    static std::uint64_t& words_front(Interpretation& s) { return s.words_.front(); }

    void trim() {
        if (n_ % 64 != 0 && !words_.empty())
            words_.back() &= (std::uint64_t{1} << (n_ % 64)) - 1;
    }

    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

struct InterpretationHash {
    std::size_t operator()(const Interpretation& s) const {
        return static_cast<std::size_t>(s.hash());
    }
};

} // namespace ndprop
