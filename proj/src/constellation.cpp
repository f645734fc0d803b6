#include "cwcu/constellation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace cwcu {

namespace {

// Reflected Gray code over levels ordered from the most positive to the most
// negative amplitude, so the first level always carries the all-zero label.
std::vector<double> axis_levels(unsigned bits) {
    const unsigned count = 1u << bits;
    std::vector<double> levels(count);
    for (unsigned g = 0; g < count; ++g) {
        // position along the axis (0 = most positive) whose Gray code is g
        unsigned pos = g;
        for (unsigned shift = 1; shift < bits; shift <<= 1) pos ^= pos >> shift;
        levels[g] = static_cast<double>(count - 1) - 2.0 * pos;
    }
    return levels;
}

// In-phase bits first, then quadrature bits. Symbol index equals its label.
Constellation make_grid(std::string name, unsigned i_bits, unsigned q_bits) {
    const auto i_levels = axis_levels(i_bits);
    const auto q_levels = axis_levels(q_bits);
    const unsigned k = i_bits + q_bits;
    std::vector<cplx> symbols(1u << k);
    std::vector<std::uint32_t> labels(symbols.size());
    for (std::uint32_t label = 0; label < symbols.size(); ++label) {
        const unsigned gi = label >> q_bits;
        const unsigned gq = label & ((1u << q_bits) - 1);
        symbols[label] = {i_levels[gi], q_levels[gq]};
        labels[label] = label;
    }
    return make_custom(std::move(name), std::move(symbols), std::move(labels));
}

}  // namespace

std::string Constellation::label_string(std::size_t q) const {
    std::string s(bits_per_symbol, '0');
    for (unsigned b = 0; b < bits_per_symbol; ++b)
        if (bit(q, b)) s[b] = '1';
    return s;
}

std::size_t Constellation::index_of_label(std::uint32_t label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw IndexOutOfRange("no symbol with label " + std::to_string(label));
    return static_cast<std::size_t>(it - labels.begin());
}

Constellation make_qpsk() { return make_grid("qpsk", 1, 1); }
Constellation make_16qam() { return make_grid("16qam", 2, 2); }
Constellation make_8qam_rect() { return make_grid("8qam-rect", 2, 1); }

Constellation make_constellation(std::string_view name) {
    if (name == "qpsk") return make_qpsk();
    if (name == "16qam") return make_16qam();
    if (name == "8qam-rect") return make_8qam_rect();
    throw ConfigError("unknown constellation '" + std::string(name) + "' (expected qpsk, 16qam or 8qam-rect)");
}

Constellation make_custom(std::string name, std::vector<cplx> symbols, std::vector<std::uint32_t> labels) {
    const std::size_t order = symbols.size();
    if (order < 2 || !std::has_single_bit(order))
        throw ModelError("constellation size " + std::to_string(order) + " is not a power of two >= 2");
    if (labels.size() != order) throw ModelError("label count does not match symbol count");
    {
        auto sorted = labels;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t q = 0; q < order; ++q)
            if (sorted[q] != q) throw ModelError("labels are not a permutation of all k-bit strings");
    }

    const cplx mean = std::accumulate(symbols.begin(), symbols.end(), cplx{}) / static_cast<double>(order);
    double energy = 0.0;
    for (const auto& s : symbols) energy += std::norm(s);
    energy /= static_cast<double>(order);
    if (!(energy > 0.0)) throw ModelError("constellation has zero energy");
    if (std::abs(mean) > 1e-9 * std::sqrt(energy)) throw ModelError("constellation is not zero mean");

    const double scale = 1.0 / std::sqrt(energy);
    for (auto& s : symbols) s *= scale;

    Constellation c;
    c.name = std::move(name);
    c.bits_per_symbol = static_cast<unsigned>(std::countr_zero(order));
    c.symbols = std::move(symbols);
    c.labels = std::move(labels);
    for (const auto& s : c.symbols) {
        c.variance += std::norm(s);
        c.pseudo_variance += s * s;
    }
    c.variance /= static_cast<double>(order);
    c.pseudo_variance /= static_cast<double>(order);
    return c;
}

BitSets bit_sets(const Constellation& c) {
    BitSets sets;
    sets.ones.resize(c.bits_per_symbol);
    sets.zeros.resize(c.bits_per_symbol);
    for (unsigned b = 0; b < c.bits_per_symbol; ++b)
        for (std::size_t q = 0; q < c.order(); ++q) (c.bit(q, b) ? sets.ones : sets.zeros)[b].push_back(q);
    return sets;
}

std::size_t hard_decide(const Constellation& c, cplx z) {
    std::size_t best = 0;
    double best_d = std::norm(z - c.symbols[0]);
    for (std::size_t q = 1; q < c.order(); ++q) {
        const double d = std::norm(z - c.symbols[q]);
        if (d < best_d) {
            best_d = d;
            best = q;
        }
    }
    return best;
}

}  // namespace cwcu
