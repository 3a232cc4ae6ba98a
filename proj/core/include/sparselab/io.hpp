#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sparselab {

/// Write via a temp file in the same directory plus rename, so interrupted
/// runs never leave a half-written file behind.
void atomic_write_file(const std::string& path, const std::function<void(std::ostream&)>& writer);
void atomic_write_text(const std::string& path, const std::string& text);

std::string read_text_file(const std::string& path);

// Little-endian raw binary helpers for the versioned dump formats.
void put_u32(std::ostream& os, std::uint32_t v);
void put_u64(std::ostream& os, std::uint64_t v);
void put_f64(std::ostream& os, double v);
void put_f64_span(std::ostream& os, std::span<const double> v);
void put_bytes(std::ostream& os, std::span<const std::uint8_t> v);

std::uint32_t get_u32(std::istream& is);
std::uint64_t get_u64(std::istream& is);
double get_f64(std::istream& is);
void get_f64_vec(std::istream& is, std::vector<double>& out, std::size_t n);
void get_bytes(std::istream& is, std::vector<std::uint8_t>& out, std::size_t n);

/// Shortest decimal form that round-trips a double exactly (%.17g).
std::string format_double(double v);

}  // namespace sparselab
