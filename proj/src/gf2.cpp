#include "cycsig/gf2.hpp"

#include <bit>
#include <nlohmann/json.hpp>

#include "cycsig/errors.hpp"

namespace cycsig::gf2 {

BitVector BitVector::from_bits(std::span<const int> bits) {
    BitVector v(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i] & 1) v.set(i);
    return v;
}

BitVector& BitVector::operator^=(const BitVector& other) {
    if (other.n_ != n_) throw Error("bit vector length mismatch");
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
    return *this;
}

bool BitVector::any() const {
    for (auto w : words_)
        if (w) return true;
    return false;
}

std::size_t BitVector::popcount() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

std::size_t BitVector::first() const {
    for (std::size_t i = 0; i < words_.size(); ++i)
        if (words_[i]) return i * 64 + static_cast<std::size_t>(std::countr_zero(words_[i]));
    return n_;
}

std::string BitVector::to_string() const {
    std::string s(n_, '0');
    for (std::size_t i = 0; i < n_; ++i)
        if (get(i)) s[i] = '1';
    return s;
}

Matrix::Matrix(std::size_t rows, std::size_t cols) : cols_(cols), rows_(rows, BitVector(cols)) {}

Matrix Matrix::from_rows(std::size_t cols, std::vector<BitVector> rows) {
    for (const auto& r : rows)
        if (r.size() != cols) throw Error("row length mismatch");
    Matrix m;
    m.cols_ = cols;
    m.rows_ = std::move(rows);
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i);
    return m;
}

RrefResult rref(const Matrix& m) {
    std::vector<BitVector> rows = m.row_list();
    std::size_t rank = 0;
    for (std::size_t col = 0; col < m.cols() && rank < rows.size(); ++col) {
        std::size_t pivot = rank;
        while (pivot < rows.size() && !rows[pivot].get(col)) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[rank], rows[pivot]);
        for (std::size_t r = 0; r < rows.size(); ++r)
            if (r != rank && rows[r].get(col)) rows[r] ^= rows[rank];
        ++rank;
    }
    return {Matrix::from_rows(m.cols(), std::move(rows)), rank};
}

std::size_t rank_of(const Matrix& m) { return rref(m).rank; }

Subspace span(std::size_t ambient, std::span<const BitVector> vectors) {
    for (const auto& v : vectors)
        if (v.size() != ambient) throw Error("vector length does not match ambient dimension");
    auto reduced = rref(Matrix::from_rows(ambient, {vectors.begin(), vectors.end()}));
    Subspace s(ambient);
    const auto& rows = reduced.matrix.row_list();
    s.basis_.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(reduced.rank));
    return s;
}

bool Subspace::contains_vector(const BitVector& v) const {
    if (v.size() != ambient_) throw Error("ambient dimension mismatch");
    BitVector r = v;
    for (const auto& b : basis_)
        if (r.get(b.first())) r ^= b;
    return !r.any();
}

std::string Subspace::key() const {
    if (basis_.empty()) return "0";
    std::string k;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
        if (i) k += '|';
        k += basis_[i].to_string();
    }
    return k;
}

Subspace Subspace::from_key(std::size_t ambient, const std::string& key) {
    std::vector<BitVector> rows;
    if (key != "0") {
        std::size_t start = 0;
        while (start <= key.size()) {
            const auto end = key.find('|', start);
            const auto part = key.substr(start, end == std::string::npos ? std::string::npos : end - start);
            if (part.size() != ambient) throw Error("subspace key row has wrong length: " + key);
            BitVector v(ambient);
            for (std::size_t i = 0; i < ambient; ++i) {
                if (part[i] == '1') v.set(i);
                else if (part[i] != '0') throw Error("bad subspace key: " + key);
            }
            rows.push_back(std::move(v));
            if (end == std::string::npos) break;
            start = end + 1;
        }
    }
    return span(ambient, rows);
}

nlohmann::json Subspace::to_json() const {
    if (ambient_ > 64) throw Error("subspace serialization supports ambient dimension <= 64");
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& b : basis_) rows.push_back(b.words().empty() ? std::uint64_t{0} : b.words()[0]);
    return {{"ambient", ambient_}, {"rank", rank()}, {"rows", rows}};
}

Subspace Subspace::from_json(const nlohmann::json& j) {
    const std::size_t ambient = j.at("ambient").get<std::size_t>();
    if (ambient > 64) throw Error("subspace serialization supports ambient dimension <= 64");
    std::vector<BitVector> rows;
    for (const auto& r : j.at("rows")) {
        const auto bits = r.get<std::uint64_t>();
        BitVector v(ambient);
        for (std::size_t i = 0; i < ambient; ++i)
            if ((bits >> i) & 1u) v.set(i);
        if (ambient < 64 && (bits >> ambient) != 0) throw Error("subspace row has bits beyond ambient dimension");
        rows.push_back(std::move(v));
    }
    auto s = span(ambient, rows);
    if (s.rank() != j.at("rank").get<std::size_t>()) throw Error("subspace rank does not match its rows");
    return s;
}

Subspace sum(const Subspace& u, const Subspace& w) {
    if (u.ambient() != w.ambient()) throw Error("ambient dimension mismatch");
    std::vector<BitVector> all = u.basis();
    all.insert(all.end(), w.basis().begin(), w.basis().end());
    return span(u.ambient(), all);
}

bool contains(const Subspace& outer, const Subspace& inner) {
    if (outer.ambient() != inner.ambient()) throw Error("ambient dimension mismatch");
    return sum(outer, inner).rank() == outer.rank();
}

std::size_t sum_dim(const Subspace& u, const Subspace& w) { return sum(u, w).rank(); }

std::size_t intersect_dim(const Subspace& u, const Subspace& w) { return u.rank() + w.rank() - sum_dim(u, w); }

}  // namespace cycsig::gf2
