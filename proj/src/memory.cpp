#include "ncomp/memory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "ncomp/errors.hpp"

namespace ncomp {

std::string to_string(ReadMode m) {
    switch (m) {
        case ReadMode::content: return "content";
        case ReadMode::temporal_forward: return "temporal_forward";
        case ReadMode::temporal_backward: return "temporal_backward";
        case ReadMode::usage_forward: return "usage_forward";
        case ReadMode::usage_backward: return "usage_backward";
    }
    return "?";
}

CompWord binarize(std::span<const double, kCompWidth> word) {
    CompWord w = 0;
    for (std::size_t j = 0; j < kCompWidth; ++j)
        if (word[j] > 0.0) w |= static_cast<CompWord>(1u << j);
    return w;
}

CompReals comp_to_reals(CompWord word) {
    CompReals r{};
    for (std::size_t j = 0; j < kCompWidth; ++j) r[j] = (word >> j) & 1u ? 1.0 : 0.0;
    return r;
}

double cosine_similarity(std::span<const double, kCompWidth> key, CompWord word) {
    if (word == 0) return 0.0;
    double dot = 0.0;
    double norm = 0.0;
    int ones = 0;
    for (std::size_t j = 0; j < kCompWidth; ++j) {
        norm += key[j] * key[j];
        if ((word >> j) & 1u) {
            dot += key[j];
            ++ones;
        }
    }
    if (norm == 0.0) return 0.0;
    return dot / (std::sqrt(norm) * std::sqrt(static_cast<double>(ones)));
}

std::array<double, kReadModes> softmax(std::span<const double, kReadModes> logits) {
    std::array<double, kReadModes> out{};
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (std::size_t m = 0; m < kReadModes; ++m) z += out[m] = std::exp(logits[m] - mx);
    for (auto& v : out) v /= z;
    return out;
}

InterfaceVector InterfaceVector::from_values(std::span<const double> values) {
    if (values.size() != kWidth) throw ConfigError("interface vector must have 29 values");
    InterfaceVector v;
    auto it = values.begin();
    std::copy_n(it, kCompWidth, v.read_key.begin());
    std::copy_n(it + 8, kReadModes, v.read_mode_logits.begin());
    std::copy_n(it + 13, kCompWidth, v.write_word_free.begin());
    std::copy_n(it + 21, kCompWidth, v.write_word_constrained.begin());
    return v;
}

std::vector<double> InterfaceVector::values() const {
    std::vector<double> out;
    out.reserve(kWidth);
    out.insert(out.end(), read_key.begin(), read_key.end());
    out.insert(out.end(), read_mode_logits.begin(), read_mode_logits.end());
    out.insert(out.end(), write_word_free.begin(), write_word_free.end());
    out.insert(out.end(), write_word_constrained.begin(), write_word_constrained.end());
    return out;
}

DualMemory::DualMemory(std::size_t data_width) : data_width_(data_width) {
    if (data_width == 0) throw ConfigError("data memory width must be positive");
}

std::span<const std::uint8_t> DualMemory::data(std::size_t row) const {
    if (row >= rows()) throw MemoryError("row out of range");
    return {data_.data() + row * data_width_, data_width_};
}

void DualMemory::index_insert(std::size_t row, CompWord word) {
    rows_by_word_[word].insert(row);
    occupied_[word >> 6] |= std::uint64_t{1} << (word & 63);
}

void DualMemory::set_comp(std::size_t row, CompWord word) {
    const CompWord old = comp_[row];
    rows_by_word_[old].erase(row);
    if (rows_by_word_[old].empty()) occupied_[old >> 6] &= ~(std::uint64_t{1} << (old & 63));
    comp_[row] = word;
    index_insert(row, word);
}

std::size_t DualMemory::allocate_and_write(std::span<const std::uint8_t> d_i, CompWord word) {
    if (d_i.size() != data_width_)
        throw ConfigError("data word width " + std::to_string(d_i.size()) + " != memory width " +
                          std::to_string(data_width_));
    const std::size_t row = next_free();
    comp_.push_back(word);
    index_insert(row, word);
    data_.insert(data_.end(), d_i.begin(), d_i.end());
    write_order_.push_back(clock_++);
    temporal_succ_.emplace_back();
    temporal_pred_.push_back(last_free_write_);
    if (last_free_write_) temporal_succ_[*last_free_write_] = row;
    last_free_write_ = row;
    usage_parent_.push_back(last_read_);
    latest_child_.emplace_back();
    if (last_read_) latest_child_[*last_read_] = row;
    return row;
}

std::size_t DualMemory::allocate_and_write(std::span<const std::uint8_t> d_i, const InterfaceVector& iface) {
    return allocate_and_write(d_i, binarize(iface.write_word_free));
}

bool DualMemory::constrained_write(CompWord word) {
    if (!last_read_) return false;
    set_comp(*last_read_, word);
    return true;
}

bool DualMemory::constrained_write(const InterfaceVector& iface) {
    return constrained_write(binarize(iface.write_word_constrained));
}

std::size_t DualMemory::content_lookup(std::span<const double, kCompWidth> key) const {
    if (rows() == 0) throw MemoryError("content lookup on empty memory");
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_row = std::numeric_limits<std::size_t>::max();
    for (unsigned w = 0; w < 256; ++w) {
        if (!((occupied_[w >> 6] >> (w & 63)) & 1u)) continue;
        const auto& bucket = rows_by_word_[w];
        const double s = cosine_similarity(key, static_cast<CompWord>(w));
        const std::size_t first = *bucket.begin();
        if (s > best || (s == best && first < best_row)) {
            best = s;
            best_row = first;
        }
    }
    return best_row;
}

std::size_t DualMemory::content_lookup_scan(std::span<const double, kCompWidth> key) const {
    if (rows() == 0) throw MemoryError("content lookup on empty memory");
    std::size_t best_row = 0;
    double best = cosine_similarity(key, comp_[0]);
    for (std::size_t r = 1; r < rows(); ++r) {
        const double s = cosine_similarity(key, comp_[r]);
        if (s > best) {
            best = s;
            best_row = r;
        }
    }
    return best_row;
}

std::size_t DualMemory::anchor() const {
    return last_read_ ? *last_read_ : rows() - 1;
}

std::array<std::size_t, kReadModes> DualMemory::candidates(const InterfaceVector& iface, bool usage_linkage) const {
    if (rows() == 0) throw MemoryError("read on empty memory");
    const std::size_t a = anchor();
    std::array<std::size_t, kReadModes> c{};
    c[0] = content_lookup(iface.read_key);
    c[1] = temporal_succ_[a].value_or(a);
    c[2] = temporal_pred_[a].value_or(a);
    c[3] = usage_linkage ? latest_child_[a].value_or(a) : a;
    c[4] = usage_linkage ? usage_parent_[a].value_or(a) : a;
    return c;
}

ReadResult DualMemory::read_attend(const InterfaceVector& iface, ReadOptions options) {
    ReadResult r;
    r.candidates = candidates(iface, options.usage_linkage);
    r.attention = softmax(iface.read_mode_logits);

    // Attention-weighted sum of the one-hot row indicators.
    double best = -1.0;
    for (std::size_t m = 0; m < kReadModes; ++m) {
        const std::size_t row = r.candidates[m];
        double w = 0.0;
        for (std::size_t k = 0; k < kReadModes; ++k)
            if (r.candidates[k] == row) w += r.attention[k];
        if (w > best || (w == best && row < r.location)) {
            best = w;
            r.location = row;
        }
    }

    if (options.hard) {
        r.c_m = comp_to_reals(comp_[r.location]);
        auto d = data(r.location);
        r.d_m.assign(d.begin(), d.end());
    } else {
        r.c_m.fill(0.0);
        std::vector<double> avg(data_width_, 0.0);
        for (std::size_t m = 0; m < kReadModes; ++m) {
            const auto word = comp_to_reals(comp_[r.candidates[m]]);
            for (std::size_t j = 0; j < kCompWidth; ++j) r.c_m[j] += r.attention[m] * word[j];
            auto d = data(r.candidates[m]);
            for (std::size_t b = 0; b < data_width_; ++b) avg[b] += r.attention[m] * d[b];
        }
        r.d_m.resize(data_width_);
        for (std::size_t b = 0; b < data_width_; ++b) r.d_m[b] = avg[b] > 0.5 ? 1 : 0;
    }
    last_read_ = r.location;
    return r;
}

std::string DualMemory::dump_json() const {
    using nlohmann::json;
    auto opt = [](const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); };
    json rows_json = json::array();
    for (std::size_t r = 0; r < rows(); ++r) {
        CompReals c = comp_to_reals(comp_[r]);
        std::string comp_bits;
        for (double v : c) comp_bits.push_back(v > 0 ? '1' : '0');
        rows_json.push_back({{"row", r},
                             {"comp", comp_bits},
                             {"data", to_bit_string(data(r))},
                             {"write_order", write_order_[r]},
                             {"temporal_succ", opt(temporal_succ_[r])},
                             {"temporal_pred", opt(temporal_pred_[r])},
                             {"usage_parent", opt(usage_parent_[r])}});
    }
    json doc = {{"data_width", data_width_},
                {"rows", rows_json},
                {"last_read", opt(last_read_)},
                {"next_free", next_free()}};
    return doc.dump();
}

}  // namespace ncomp
