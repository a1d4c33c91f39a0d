#include <sstream>

#include <nlohmann/json.hpp>

#include "hysrl/estimation.hpp"
#include "hysrl/mdp_io.hpp"

namespace hysrl {

using nlohmann::json;

namespace {
constexpr std::string_view kSeparator = "---";
constexpr std::string_view kCsvHeader = "s,a,s_next,count";
}  // namespace

std::string serialize_source(const SourceDataset& dataset) {
    const auto& d = dataset.meta.dims;
    if (dataset.model.dims() != d)
        throw DimensionError("source dataset: metadata dims " + to_string(d) +
                             " do not match count tables " + to_string(dataset.model.dims()));
    const json header{{"version", dataset.meta.version},
                      {"S", d.S},
                      {"A", d.A},
                      {"H", d.H},
                      {"env_fingerprint", dataset.meta.env_fingerprint},
                      {"episodes", dataset.meta.episodes}};
    std::ostringstream os;
    os << header.dump() << "\n" << kSeparator << "\n" << kCsvHeader << "\n";
    for (int s = 0; s < d.S; ++s)
        for (int a = 0; a < d.A; ++a)
            for (int n = 0; n < d.S; ++n)
                if (const Count c = dataset.model.n(s, a, n); c > 0)
                    os << s << ',' << a << ',' << n << ',' << c << '\n';
    return os.str();
}

SourceDataset parse_source(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw FormatError("source dataset: empty file");

    SourceDataset ds;
    try {
        const json header = json::parse(line);
        ds.meta.version = header.at("version").get<int>();
        ds.meta.dims = {header.at("S").get<int>(), header.at("A").get<int>(), header.at("H").get<int>()};
        ds.meta.env_fingerprint = header.at("env_fingerprint").get<std::string>();
        ds.meta.episodes = header.at("episodes").get<long long>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("source dataset: corrupt header: ") + e.what());
    }
    if (ds.meta.version != 1)
        throw FormatError("source dataset: unsupported version " + std::to_string(ds.meta.version));
    const auto& d = ds.meta.dims;
    if (d.S <= 0 || d.A <= 0 || d.H <= 0)
        throw FormatError("source dataset: non-positive dimensions " + to_string(d));

    if (!std::getline(in, line) || line != kSeparator)
        throw FormatError("source dataset: missing '---' separator");
    if (!std::getline(in, line) || line != kCsvHeader)
        throw FormatError("source dataset: expected CSV header '" + std::string(kCsvHeader) + "'");

    std::vector<Count> counts(static_cast<std::size_t>(d.S) * d.A * d.S, 0);
    int line_no = 3;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        long long s = -1, a = -1, n = -1, c = -1;
        char c1 = 0, c2 = 0, c3 = 0;
        if (!(row >> s >> c1 >> a >> c2 >> n >> c3 >> c) || c1 != ',' || c2 != ',' || c3 != ',' ||
            !(row >> std::ws).eof())
            throw FormatError("source dataset: malformed row at line " + std::to_string(line_no));
        if (s < 0 || s >= d.S || a < 0 || a >= d.A || n < 0 || n >= d.S || c < 0)
            throw FormatError("source dataset: row out of range at line " + std::to_string(line_no));
        counts[(static_cast<std::size_t>(s) * d.A + static_cast<std::size_t>(a)) * d.S +
               static_cast<std::size_t>(n)] += c;
    }
    ds.model = EmpiricalModel::from_counts(d, std::move(counts));
    return ds;
}

void save_source(const std::filesystem::path& path, const SourceDataset& dataset) {
    write_file(path, serialize_source(dataset));
}

SourceDataset load_source(const std::filesystem::path& path, const std::optional<Dims>& expected) {
    SourceDataset ds = parse_source(read_file(path));
    if (expected && *expected != ds.meta.dims)
        throw DimensionError("source dataset " + path.string() + ": expected " + to_string(*expected) +
                             ", found " + to_string(ds.meta.dims));
    return ds;
}

}  // namespace hysrl
