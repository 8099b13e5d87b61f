#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "ncomp/smallnet.hpp"

namespace ncomp {

struct LayoutEntry {
    std::string module;
    LayerSpec layer;
    bool operator==(const LayoutEntry&) const = default;
};

// Flat parameter vector plus the (module, layer) order it was flattened in.
struct Genome {
    std::vector<LayoutEntry> layout;
    std::vector<double> values;

    std::size_t expected_length() const;
    // Length matches the layout; throws ConfigError otherwise.
    void validate() const;
    bool operator==(const Genome&) const = default;
};

struct NamedNet {
    std::string name;
    Mlp* net;
};

// Concatenates the modules' parameters in the listed order.
Genome genome_view(const std::vector<NamedNet>& modules);
// Writes the genome back into the modules' parameters. The layout must match
// the modules exactly.
void unflatten(const Genome& genome, const std::vector<NamedNet>& modules);

// `.json` paths use a JSON document; anything else uses the binary format
// (magic "NCGN", u32 version, u64 layout-json length, layout json,
// u64 value count, raw little-endian doubles).
void save_genome(const Genome& genome, const std::filesystem::path& path);
Genome load_genome(const std::filesystem::path& path);

std::string genome_to_json(const Genome& genome);
Genome genome_from_json(const std::string& text);

}  // namespace ncomp
