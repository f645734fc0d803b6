#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cwcu/linalg.hpp"

namespace cwcu {

/// Equiprobable symbol alphabet with bit labels.
///
/// Symbols are stored so that `labels[q]` is the label of `symbols[q]`. For
/// the built-in alphabets the label of symbol q is q itself. Bit position 0 is
/// the most significant label bit (the first character of the label string).
struct Constellation {
    std::string name;
    std::vector<cplx> symbols;
    unsigned bits_per_symbol = 0;
    std::vector<std::uint32_t> labels;
    double variance = 0.0;        // E|s|^2
    cplx pseudo_variance{};       // E[s^2]

    std::size_t order() const noexcept { return symbols.size(); }
    bool is_proper(double tol = 1e-12) const { return std::abs(pseudo_variance) < tol; }
    /// Bit `bit` (0 = MSB) of the label of symbol q.
    unsigned bit(std::size_t q, unsigned bit) const { return (labels[q] >> (bits_per_symbol - 1 - bit)) & 1u; }
    std::string label_string(std::size_t q) const;
    std::size_t index_of_label(std::uint32_t label) const;
};

/// Per bit position: indices of symbols whose label has that bit set / clear.
struct BitSets {
    std::vector<std::vector<std::size_t>> ones;
    std::vector<std::vector<std::size_t>> zeros;

    unsigned bits() const noexcept { return static_cast<unsigned>(ones.size()); }
};

Constellation make_qpsk();
Constellation make_16qam();
/// Rectangular {+-1, +-3} x {+-1} grid; improper with pseudo-variance 2/3.
Constellation make_8qam_rect();
/// qpsk | 16qam | 8qam-rect
Constellation make_constellation(std::string_view name);

/// Validates labels and zero mean, then normalizes to unit variance and
/// computes the second-order statistics. Throws ModelError on violations.
Constellation make_custom(std::string name, std::vector<cplx> symbols, std::vector<std::uint32_t> labels);

BitSets bit_sets(const Constellation& c);

/// Nearest symbol to z; ties go to the lowest index.
std::size_t hard_decide(const Constellation& c, cplx z);

}  // namespace cwcu
