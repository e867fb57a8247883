#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace lirf {

static_assert(std::endian::native == std::endian::little,
              "serialized records are little-endian; big-endian hosts are unsupported");

struct SerialError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Append-only little-endian byte buffer. All file formats in the project
// (snapshots, checkpoints, banks) are built from these primitives.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) { raw(&v, 2); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void f64(double v) { raw(&v, 8); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
    void f64_span(const double* p, std::size_t n) {
        u64(n);
        raw(p, n * sizeof(double));
    }
    void f64_vec(const std::vector<double>& v) { f64_span(v.data(), v.size()); }

    const std::vector<std::uint8_t>& bytes() const { return buf_; }

private:
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    ByteReader(const std::uint8_t* data, std::size_t size) : p_(data), end_(data + size) {}
    explicit ByteReader(const std::vector<std::uint8_t>& v) : ByteReader(v.data(), v.size()) {}

    std::uint8_t u8() { return take<std::uint8_t>(); }
    std::uint16_t u16() { return take<std::uint16_t>(); }
    std::uint32_t u32() { return take<std::uint32_t>(); }
    std::uint64_t u64() { return take<std::uint64_t>(); }
    double f64() { return take<double>(); }
    std::string str() {
        const auto n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(p_), n);
        p_ += n;
        return s;
    }
    std::vector<double> f64_vec() {
        const auto n = u64();
        need(n * sizeof(double));
        std::vector<double> v(n);
        std::memcpy(v.data(), p_, n * sizeof(double));
        p_ += n * sizeof(double);
        return v;
    }
    bool exhausted() const { return p_ == end_; }

private:
    template <class T>
    T take() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, p_, sizeof(T));
        p_ += sizeof(T);
        return v;
    }
    void need(std::size_t n) const {
        if (std::size_t(end_ - p_) < n) throw SerialError("truncated record");
    }
    const std::uint8_t* p_;
    const std::uint8_t* end_;
};

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_file(const std::string& path);

}  // namespace lirf
