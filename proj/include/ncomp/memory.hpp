#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ncomp/bits.hpp"

namespace ncomp {

inline constexpr std::size_t kCompWidth = 8;
inline constexpr std::size_t kReadModes = 5;

// Attention mechanisms of the read head, in interface order.
enum class ReadMode : std::size_t {
    content = 0,
    temporal_forward = 1,
    temporal_backward = 2,
    usage_forward = 3,
    usage_backward = 4,
};

std::string to_string(ReadMode m);

// An 8-wide binary computational word; bit j is element j.
using CompWord = std::uint8_t;
using CompReals = std::array<double, kCompWidth>;

// Threshold at zero: element > 0 becomes 1.
CompWord binarize(std::span<const double, kCompWidth> word);
CompReals comp_to_reals(CompWord word);

// Cosine similarity between a real key and a binary word; 0 for zero vectors.
double cosine_similarity(std::span<const double, kCompWidth> key, CompWord word);

std::array<double, kReadModes> softmax(std::span<const double, kReadModes> logits);

struct InterfaceVector {
    static constexpr std::size_t kWidth = 2 * kCompWidth + kReadModes + kCompWidth;  // 29

    CompReals read_key{};
    std::array<double, kReadModes> read_mode_logits{};
    CompReals write_word_free{};
    CompReals write_word_constrained{};

    // Layout: key[0..8) logits[8..13) free[13..21) constrained[21..29).
    static InterfaceVector from_values(std::span<const double> values);
    std::vector<double> values() const;
};

struct ReadOptions {
    bool hard = true;
    bool usage_linkage = true;
};

struct ReadResult {
    std::size_t location = 0;
    CompReals c_m{};
    Bits d_m;
    std::array<double, kReadModes> attention{};
    std::array<std::size_t, kReadModes> candidates{};
};

// Coupled computational / data memory. Rows are allocated sequentially and
// never reused; both memories always have the same number of rows.
class DualMemory {
public:
    explicit DualMemory(std::size_t data_width);

    std::size_t rows() const { return comp_.size(); }
    std::size_t data_width() const { return data_width_; }
    std::size_t next_free() const { return rows(); }

    CompWord comp(std::size_t row) const { return comp_.at(row); }
    std::span<const std::uint8_t> data(std::size_t row) const;
    std::uint64_t write_order(std::size_t row) const { return write_order_.at(row); }

    std::optional<std::size_t> temporal_succ(std::size_t row) const { return temporal_succ_.at(row); }
    std::optional<std::size_t> temporal_pred(std::size_t row) const { return temporal_pred_.at(row); }
    std::optional<std::size_t> usage_parent(std::size_t row) const { return usage_parent_.at(row); }
    // Most recently written row whose usage parent is `row`.
    std::optional<std::size_t> latest_child(std::size_t row) const { return latest_child_.at(row); }
    std::optional<std::size_t> last_read() const { return last_read_; }

    // Free head: writes at next_free, extends the temporal chain and records
    // the current read location as the usage parent.
    std::size_t allocate_and_write(std::span<const std::uint8_t> d_i, CompWord word);
    std::size_t allocate_and_write(std::span<const std::uint8_t> d_i, const InterfaceVector& iface);

    // Constrained head: overwrites comp[last_read]; no-op before the first read.
    bool constrained_write(CompWord word);
    bool constrained_write(const InterfaceVector& iface);

    // Row chosen by each of the five mechanisms, without moving the head.
    std::array<std::size_t, kReadModes> candidates(const InterfaceVector& iface, bool usage_linkage) const;

    // Hard-attention read (or the soft ablation). Updates last_read.
    ReadResult read_attend(const InterfaceVector& iface, ReadOptions options = {});

    // Argmax cosine similarity over comp rows, lowest row on ties. Indexed by
    // word value; content_lookup_scan is the brute-force reference.
    std::size_t content_lookup(std::span<const double, kCompWidth> key) const;
    std::size_t content_lookup_scan(std::span<const double, kCompWidth> key) const;

    std::string dump_json() const;

private:
    std::size_t anchor() const;
    void set_comp(std::size_t row, CompWord word);
    void index_insert(std::size_t row, CompWord word);

    std::size_t data_width_;
    std::vector<CompWord> comp_;
    std::vector<std::uint8_t> data_;  // rows() * data_width_
    std::vector<std::uint64_t> write_order_;
    std::vector<std::optional<std::size_t>> temporal_succ_;
    std::vector<std::optional<std::size_t>> temporal_pred_;
    std::vector<std::optional<std::size_t>> usage_parent_;
    std::vector<std::optional<std::size_t>> latest_child_;
    std::optional<std::size_t> last_read_;
    std::optional<std::size_t> last_free_write_;
    std::uint64_t clock_ = 0;
    std::array<std::set<std::size_t>, 256> rows_by_word_;
    std::array<std::uint64_t, 4> occupied_{};
};

}  // namespace ncomp
