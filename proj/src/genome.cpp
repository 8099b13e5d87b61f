#include "ncomp/genome.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ncomp/errors.hpp"

namespace ncomp {

using nlohmann::json;

std::size_t Genome::expected_length() const {
    std::size_t n = 0;
    for (const auto& e : layout) n += e.layer.param_count();
    return n;
}

void Genome::validate() const {
    if (values.size() != expected_length())
        throw ConfigError("genome has " + std::to_string(values.size()) + " values, layout needs " +
                          std::to_string(expected_length()));
}

Genome genome_view(const std::vector<NamedNet>& modules) {
    Genome g;
    for (const auto& m : modules) {
        for (const auto& l : m.net->layers()) g.layout.push_back({m.name, l});
        auto p = m.net->params();
        g.values.insert(g.values.end(), p.begin(), p.end());
    }
    return g;
}

void unflatten(const Genome& genome, const std::vector<NamedNet>& modules) {
    genome.validate();
    std::size_t entry = 0;
    std::size_t offset = 0;
    for (const auto& m : modules) {
        for (const auto& l : m.net->layers()) {
            if (entry >= genome.layout.size() || genome.layout[entry].module != m.name ||
                !(genome.layout[entry].layer == l))
                throw ConfigError("genome layout does not match module '" + m.name + "'");
            ++entry;
        }
        auto p = m.net->params();
        std::copy_n(genome.values.begin() + static_cast<std::ptrdiff_t>(offset), p.size(), p.begin());
        offset += p.size();
    }
    if (entry != genome.layout.size()) throw ConfigError("genome has layout entries for unknown modules");
}

namespace {

json layout_json(const Genome& g) {
    json arr = json::array();
    for (const auto& e : g.layout)
        arr.push_back({{"module", e.module},
                       {"input_width", e.layer.input_width},
                       {"output_width", e.layer.output_width},
                       {"activation", to_string(e.layer.activation)}});
    return arr;
}

std::vector<LayoutEntry> layout_from_json(const json& arr) {
    std::vector<LayoutEntry> out;
    for (const auto& e : arr)
        out.push_back({e.at("module").get<std::string>(),
                       {e.at("input_width").get<std::size_t>(), e.at("output_width").get<std::size_t>(),
                        activation_from_string(e.at("activation").get<std::string>())}});
    return out;
}

constexpr char kMagic[4] = {'N', 'C', 'G', 'N'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
    static_assert(std::endian::native == std::endian::little, "binary genome format assumes little-endian");
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw ConfigError("truncated genome file");
    return v;
}

}  // namespace

std::string genome_to_json(const Genome& genome) {
    json doc;
    doc["layout"] = layout_json(genome);
    doc["values"] = genome.values;
    return doc.dump();
}

Genome genome_from_json(const std::string& text) {
    auto doc = json::parse(text);
    Genome g;
    g.layout = layout_from_json(doc.at("layout"));
    g.values = doc.at("values").get<std::vector<double>>();
    g.validate();
    return g;
}

void save_genome(const Genome& genome, const std::filesystem::path& path) {
    genome.validate();
    if (path.extension() == ".json") {
        std::ofstream os(path);
        if (!os) throw ConfigError("cannot write " + path.string());
        os << genome_to_json(genome) << '\n';
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path.string());
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    const std::string layout = layout_json(genome).dump();
    put<std::uint64_t>(os, layout.size());
    os.write(layout.data(), static_cast<std::streamsize>(layout.size()));
    put<std::uint64_t>(os, genome.values.size());
    os.write(reinterpret_cast<const char*>(genome.values.data()),
             static_cast<std::streamsize>(genome.values.size() * sizeof(double)));
}

Genome load_genome(const std::filesystem::path& path) {
    if (path.extension() == ".json") {
        std::ifstream is(path);
        if (!is) throw ConfigError("cannot read " + path.string());
        std::stringstream ss;
        ss << is.rdbuf();
        return genome_from_json(ss.str());
    }
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw ConfigError(path.string() + " is not a genome file");
    if (get<std::uint32_t>(is) != kVersion) throw ConfigError("unsupported genome file version");
    std::string layout(get<std::uint64_t>(is), '\0');
    is.read(layout.data(), static_cast<std::streamsize>(layout.size()));
    Genome g;
    g.layout = layout_from_json(json::parse(layout));
    g.values.resize(get<std::uint64_t>(is));
    is.read(reinterpret_cast<char*>(g.values.data()), static_cast<std::streamsize>(g.values.size() * sizeof(double)));
    if (!is) throw ConfigError("truncated genome file");
    g.validate();
    return g;
}

}  // namespace ncomp
