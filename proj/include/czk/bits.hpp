#ifndef CZK_BITS_HPP_
#define CZK_BITS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "czk/rng.hpp"

namespace czk {

// Bit string with one byte per bit (index 0 first). Payload sizes in this
// project are tiny, so clarity wins over packing.
class Bits {
public:
    Bits() = default;
    explicit Bits(std::size_t n) : v_(n, 0) {}
    Bits(std::initializer_list<int> init) {
        v_.reserve(init.size());
        for (int b : init) v_.push_back(static_cast<std::uint8_t>(b & 1));
    }

    static Bits random(std::size_t n, Stream& s) {
        Bits out(n);
        std::uint64_t w = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i % 64 == 0) w = s.next();
            out.v_[i] = static_cast<std::uint8_t>((w >> (i % 64)) & 1);
        }
        return out;
    }

    // Low 'n' bits of a word, bit 0 first.
    static Bits from_u64(std::uint64_t x, std::size_t n) {
        Bits out(n);
        for (std::size_t i = 0; i < n && i < 64; ++i) out.v_[i] = (x >> i) & 1;
        return out;
    }

    std::size_t size() const { return v_.size(); }
    bool empty() const { return v_.empty(); }
    std::uint8_t operator[](std::size_t i) const { return v_[i]; }
    std::uint8_t& operator[](std::size_t i) { return v_[i]; }

    bool operator==(const Bits& o) const { return v_ == o.v_; }
    bool operator!=(const Bits& o) const { return v_ != o.v_; }

    Bits operator^(const Bits& o) const {
        if (size() != o.size()) throw std::invalid_argument("Bits: xor size mismatch");
        Bits out(size());
        for (std::size_t i = 0; i < size(); ++i) out.v_[i] = v_[i] ^ o.v_[i];
        return out;
    }

    Bits slice(std::size_t from, std::size_t len) const {
        if (from + len > size()) throw std::out_of_range("Bits: slice");
        Bits out(len);
        for (std::size_t i = 0; i < len; ++i) out.v_[i] = v_[from + i];
        return out;
    }

    void append(const Bits& o) { v_.insert(v_.end(), o.v_.begin(), o.v_.end()); }

    std::uint64_t to_u64() const {
        std::uint64_t x = 0;
        for (std::size_t i = 0; i < size() && i < 64; ++i)
            x |= static_cast<std::uint64_t>(v_[i]) << i;
        return x;
    }

    // Packed bytes, bit (8*i + j) -> byte i bit j. Trailing bits zero-padded.
    std::vector<std::uint8_t> to_bytes() const {
        std::vector<std::uint8_t> out((size() + 7) / 8, 0);
        for (std::size_t i = 0; i < size(); ++i)
            if (v_[i]) out[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
        return out;
    }

    static Bits from_bytes(const std::vector<std::uint8_t>& bytes, std::size_t nbits) {
        if (nbits > bytes.size() * 8) throw std::invalid_argument("Bits: from_bytes length");
        Bits out(nbits);
        for (std::size_t i = 0; i < nbits; ++i)
            out.v_[i] = (bytes[i / 8] >> (i % 8)) & 1;
        return out;
    }

    std::string to_hex() const {
        static const char* digits = "0123456789abcdef";
        auto bytes = to_bytes();
        std::string s;
        s.reserve(bytes.size() * 2);
        for (auto b : bytes) {
            s.push_back(digits[b >> 4]);
            s.push_back(digits[b & 0xF]);
        }
        return s;
    }

    static Bits from_hex(const std::string& hex, std::size_t nbits) {
        auto nib = [](char c) -> int {
            if (c >= '0' && c <= '9') return c - '0';
            if (c >= 'a' && c <= 'f') return c - 'a' + 10;
            if (c >= 'A' && c <= 'F') return c - 'A' + 10;
            throw std::invalid_argument("Bits: bad hex digit");
        };
        if (hex.size() % 2 != 0) throw std::invalid_argument("Bits: odd hex length");
        std::vector<std::uint8_t> bytes(hex.size() / 2);
        for (std::size_t i = 0; i < bytes.size(); ++i)
            bytes[i] = static_cast<std::uint8_t>((nib(hex[2 * i]) << 4) | nib(hex[2 * i + 1]));
        return from_bytes(bytes, nbits);
    }

    std::uint64_t digest() const {
        return chain_bytes(0x452821E638D01377ULL, v_.data(), v_.size());
    }

private:
    std::vector<std::uint8_t> v_;
};

}  // namespace czk

#endif  // CZK_BITS_HPP_
