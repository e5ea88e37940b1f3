#include <set>

#include "evoprune/errors.hpp"
#include "evoprune/format.hpp"
#include "evoprune/serialization.hpp"

namespace evoprune {

ordered_json genome_to_json(const Genome& genome) {
    ordered_json j;
    j["format"] = kGenomeFormat;
    j["n"] = genome.n;
    j["bias_neuron"] = genome.bias_neuron;
    j["sigma_mut"] = genome.sigma_mut;
    j["tau"] = genome.tau;
    auto weights = ordered_json::array();
    auto mask = ordered_json::array();
    for (int i = 0; i < genome.n; ++i) {
        auto row = ordered_json::array();
        std::string bits;
        for (int j2 = 0; j2 < genome.n; ++j2) {
            row.push_back(genome.weights(i, j2));
            bits += genome.connected(i, j2) ? '1' : '0';
        }
        weights.push_back(std::move(row));
        mask.push_back(std::move(bits));
    }
    j["weights"] = std::move(weights);
    j["mask"] = std::move(mask);
    return j;
}

Genome genome_from_json(const nlohmann::json& j) {
    try {
        check_format(j, kGenomeFormat);
        static const std::set<std::string> known{"format", "n", "bias_neuron", "sigma_mut", "tau", "weights", "mask"};
        for (const auto& [key, _] : j.items())
            if (!known.contains(key)) throw FormatError("unknown genome field '" + key + "'");
        Genome g;
        g.n = j.at("n").get<int>();
        if (g.n < kMinNeurons) throw FormatError("genome has fewer than 11 neurons");
        g.bias_neuron = j.at("bias_neuron").get<bool>();
        g.sigma_mut = j.at("sigma_mut").get<double>();
        g.tau = j.at("tau").get<double>();
        g.weights = SquareMatrix(g.n);
        g.mask.assign(static_cast<std::size_t>(g.n) * g.n, 0);
        const auto& weights = j.at("weights");
        const auto& mask = j.at("mask");
        if (weights.size() != static_cast<std::size_t>(g.n) || mask.size() != static_cast<std::size_t>(g.n))
            throw FormatError("genome matrix row count does not match n");
        for (int i = 0; i < g.n; ++i) {
            const auto bits = mask.at(i).get<std::string>();
            if (weights.at(i).size() != static_cast<std::size_t>(g.n) || bits.size() != static_cast<std::size_t>(g.n))
                throw FormatError("genome matrix row length does not match n");
            for (int c = 0; c < g.n; ++c) {
                if (bits[c] != '0' && bits[c] != '1') throw FormatError("mask bitmap must be 0/1");
                g.set_connected(i, c, bits[c] == '1');
                g.weights(i, c) = weights.at(i).at(c).get<double>();
                if (!g.connected(i, c) && g.weights(i, c) != 0.0)
                    throw FormatError("severed connection carries a non-zero weight");
            }
        }
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed genome: ") + e.what());
    }
}

std::string genome_to_text(const Genome& genome) { return genome_to_json(genome).dump(1) + "\n"; }

Genome genome_from_text(const std::string& text) {
    try {
        return genome_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("malformed genome: ") + e.what());
    }
}

}  // namespace evoprune
