#include "hysrl/mdp_io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hysrl {

using nlohmann::json;

namespace {

json mdp_json(const TabularMDP& mdp) {
    const auto [S, A, H] = mdp.dims();
    json kernel = json::array();
    json reward = json::array();
    for (int s = 0; s < S; ++s) {
        json ks = json::array();
        json rs = json::array();
        for (int a = 0; a < A; ++a) {
            const auto row = mdp.row(s, a);
            ks.push_back(json(std::vector<double>(row.begin(), row.end())));
            rs.push_back(mdp.r(s, a));
        }
        kernel.push_back(std::move(ks));
        reward.push_back(std::move(rs));
    }
    return json{{"S", S},
                {"A", A},
                {"H", H},
                {"kernel", std::move(kernel)},
                {"reward", std::move(reward)},
                {"rho", std::vector<double>(mdp.rho().begin(), mdp.rho().end())}};
}

json parse(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace

std::string mdp_to_json(const TabularMDP& mdp, std::string_view generator_json) {
    json doc = mdp_json(mdp);
    if (!generator_json.empty()) doc["generator"] = parse(generator_json);
    return doc.dump(1) + "\n";
}

TabularMDP mdp_from_json(std::string_view text) {
    const json doc = parse(text);
    try {
        const Dims dims{doc.at("S").get<int>(), doc.at("A").get<int>(), doc.at("H").get<int>()};
        if (dims.S <= 0 || dims.A <= 0 || dims.H <= 0)
            throw FormatError("MDP document has non-positive dimensions " + to_string(dims));
        std::vector<double> kernel;
        std::vector<double> reward;
        const auto& k = doc.at("kernel");
        const auto& r = doc.at("reward");
        if (k.size() != static_cast<std::size_t>(dims.S) || r.size() != static_cast<std::size_t>(dims.S))
            throw DimensionError("MDP document: kernel/reward outer length must equal S");
        for (int s = 0; s < dims.S; ++s) {
            if (k[s].size() != static_cast<std::size_t>(dims.A) || r[s].size() != static_cast<std::size_t>(dims.A))
                throw DimensionError("MDP document: kernel/reward rows must have A entries");
            for (int a = 0; a < dims.A; ++a) {
                if (k[s][a].size() != static_cast<std::size_t>(dims.S))
                    throw DimensionError("MDP document: kernel rows must have S entries");
                for (const auto& p : k[s][a]) kernel.push_back(p.get<double>());
                reward.push_back(r[s][a].get<double>());
            }
        }
        auto rho = doc.at("rho").get<std::vector<double>>();
        TabularMDP mdp(dims, std::move(kernel), std::move(reward), std::move(rho));
        require_valid(mdp);
        return mdp;
    } catch (const json::exception& e) {
        throw FormatError(std::string("MDP document: ") + e.what());
    }
}

std::string generator_from_json(std::string_view text) {
    const json doc = parse(text);
    if (!doc.contains("generator")) return {};
    return doc["generator"].dump();
}

TabularMDP load_mdp(const std::filesystem::path& path) { return mdp_from_json(read_file(path)); }

void save_mdp(const std::filesystem::path& path, const TabularMDP& mdp,
              std::string_view generator_json) {
    write_file(path, mdp_to_json(mdp, generator_json));
}

std::string fingerprint(const TabularMDP& mdp) {
    const std::string canonical = mdp_json(mdp).dump();
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string policy_to_json(const Policy& pi) {
    const auto [S, A, H] = pi.dims();
    json doc{{"S", S}, {"A", A}, {"H", H}};
    if (pi.is_deterministic()) {
        json rows = json::array();
        for (int h = 0; h < H; ++h) {
            std::vector<int> row(static_cast<std::size_t>(S));
            for (int s = 0; s < S; ++s) row[static_cast<std::size_t>(s)] = pi.action(h, s);
            rows.push_back(row);
        }
        doc["actions"] = std::move(rows);
    } else {
        json rows = json::array();
        for (int h = 0; h < H; ++h) {
            json hs = json::array();
            for (int s = 0; s < S; ++s) {
                std::vector<double> row(static_cast<std::size_t>(A));
                for (int a = 0; a < A; ++a) row[static_cast<std::size_t>(a)] = pi.prob(h, s, a);
                hs.push_back(row);
            }
            rows.push_back(std::move(hs));
        }
        doc["probs"] = std::move(rows);
    }
    return doc.dump() + "\n";
}

Policy policy_from_json(std::string_view text) {
    const json doc = parse(text);
    try {
        const Dims dims{doc.at("S").get<int>(), doc.at("A").get<int>(), doc.at("H").get<int>()};
        if (doc.contains("actions")) {
            std::vector<ActionId> actions;
            const auto& rows = doc["actions"];
            if (rows.size() != static_cast<std::size_t>(dims.H))
                throw DimensionError("policy document: expected H action rows");
            for (const auto& row : rows) {
                if (row.size() != static_cast<std::size_t>(dims.S))
                    throw DimensionError("policy document: action rows must have S entries");
                for (const auto& a : row) actions.push_back(a.get<int>());
            }
            return Policy::deterministic(dims, std::move(actions));
        }
        std::vector<double> probs;
        for (const auto& hs : doc.at("probs"))
            for (const auto& row : hs)
                for (const auto& p : row) probs.push_back(p.get<double>());
        return Policy::stochastic(dims, std::move(probs));
    } catch (const json::exception& e) {
        throw FormatError(std::string("policy document: ") + e.what());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace hysrl
