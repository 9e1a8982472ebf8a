#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace cycsig::gf2 {

// Bit-packed vector over F2. Bits beyond size() are always zero.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

    static BitVector from_bits(std::span<const int> bits);

    std::size_t size() const { return n_; }
    bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i, bool value = true) {
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (value) words_[i >> 6] |= mask;
        else words_[i >> 6] &= ~mask;
    }
    void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

    BitVector& operator^=(const BitVector& other);
    bool any() const;
    std::size_t popcount() const;
    // Index of the lowest set bit, or size() if none.
    std::size_t first() const;

    std::span<const std::uint64_t> words() const { return words_; }
    std::string to_string() const;

    friend bool operator==(const BitVector&, const BitVector&) = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    static Matrix from_rows(std::size_t cols, std::vector<BitVector> rows);
    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_.size(); }
    std::size_t cols() const { return cols_; }
    bool get(std::size_t r, std::size_t c) const { return rows_[r].get(c); }
    void set(std::size_t r, std::size_t c, bool value = true) { rows_[r].set(c, value); }
    const BitVector& row(std::size_t r) const { return rows_[r]; }
    const std::vector<BitVector>& row_list() const { return rows_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t cols_ = 0;
    std::vector<BitVector> rows_;
};

struct RrefResult {
    Matrix matrix;
    std::size_t rank = 0;
};

// Reduced row echelon form of the row space. Zero rows are kept at the
// bottom so the shape matches the input.
RrefResult rref(const Matrix& m);

std::size_t rank_of(const Matrix& m);

class Subspace {
public:
    explicit Subspace(std::size_t ambient = 0) : ambient_(ambient) {}

    std::size_t ambient() const { return ambient_; }
    std::size_t rank() const { return basis_.size(); }
    // Nonzero RREF rows, pivots strictly increasing.
    const std::vector<BitVector>& basis() const { return basis_; }

    bool contains_vector(const BitVector& v) const;
    // Canonical key: RREF rows as bit strings (coordinate 0 first) joined by
    // '|'; the zero subspace is "0".
    std::string key() const;
    static Subspace from_key(std::size_t ambient, const std::string& key);

    nlohmann::json to_json() const;
    static Subspace from_json(const nlohmann::json& j);

    friend bool operator==(const Subspace&, const Subspace&) = default;

private:
    friend Subspace span(std::size_t ambient, std::span<const BitVector> vectors);
    std::size_t ambient_ = 0;
    std::vector<BitVector> basis_;
};

Subspace span(std::size_t ambient, std::span<const BitVector> vectors);

// True iff inner is a subspace of outer.
bool contains(const Subspace& outer, const Subspace& inner);
std::size_t sum_dim(const Subspace& u, const Subspace& w);
std::size_t intersect_dim(const Subspace& u, const Subspace& w);
Subspace sum(const Subspace& u, const Subspace& w);

}  // namespace cycsig::gf2
