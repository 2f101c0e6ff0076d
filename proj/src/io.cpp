#include "depgof/io.hpp"

#include "depgof/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace depgof {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line, char delimiter) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, delimiter)) out.push_back(trim(cell));
    if (!line.empty() && line.back() == delimiter) out.emplace_back();
    return out;
}

std::optional<double> parse_double(const std::string& text) {
    if (text.empty()) return std::nullopt;
    double v = 0.0;
    const char* begin = text.data();
    if (*begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

template <class Int>
std::optional<Int> parse_integer(const std::string& text) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

// Parses "# depgof <kind> key=value ..." into kind plus a key map.
std::pair<std::string, std::map<std::string, std::string>> parse_header(const std::string& line,
                                                                          const std::filesystem::path& path) {
    std::istringstream ss(line);
    std::string hash, tag, kind;
    ss >> hash >> tag >> kind;
    if (hash != "#" || tag != "depgof" || kind.empty()) throw DataError(path.string() + ": missing depgof header");
    std::map<std::string, std::string> fields;
    std::string token;
    while (ss >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) throw DataError(path.string() + ": malformed header field '" + token + "'");
        fields[token.substr(0, eq)] = token.substr(eq + 1);
    }
    return {kind, fields};
}

std::size_t header_size(const std::map<std::string, std::string>& fields, const std::string& key,
                        const std::filesystem::path& path) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw DataError(path.string() + ": header lacks " + key);
    const auto v = parse_integer<std::size_t>(it->second);
    if (!v) throw DataError(path.string() + ": bad header value " + key + "=" + it->second);
    return *v;
}

std::vector<std::vector<double>> read_numeric_rows(std::istream& in, const std::filesystem::path& path,
                                                   std::size_t first_line) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = first_line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<double> row;
        for (const auto& cell : split(line, ',')) {
            const auto v = parse_double(cell);
            if (!v) throw DataError(path.string() + ": line " + std::to_string(line_no) + ": non-numeric value '" + cell + "'");
            row.push_back(*v);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Empirical: return "empirical";
        case ModelKind::Ar1: return "ar1";
        case ModelKind::Fgn: return "fgn";
        case ModelKind::Iid: return "iid";
    }
    return "?";
}

ModelKind parse_model_kind(const std::string& text) {
    if (text == "empirical") return ModelKind::Empirical;
    if (text == "ar1") return ModelKind::Ar1;
    if (text == "fgn") return ModelKind::Fgn;
    if (text == "iid") return ModelKind::Iid;
    throw ConfigError("unknown model '" + text + "' (expected empirical, ar1, fgn or iid)");
}

void PipelineConfig::validate() const {
    if (grid_m < 10) throw ConfigError("grid_m must be at least 10");
    if (t_max < 1) throw ConfigError("t_max must be at least 1");
    if (n_trials < 1000) throw ConfigError("n_trials must be at least 1000");
    if (!seed) throw ConfigError("seed is required");
    if (model == ModelKind::Empirical && input.empty()) throw ConfigError("model=empirical needs an input path");
    if (model != ModelKind::Empirical) {
        if (n < grid_m + 2) throw ConfigError("n must exceed grid_m + 1");
        if (replications < 1) throw ConfigError("replications must be at least 1");
    }
    try {
        if (model == ModelKind::Ar1) Ar1LogVolParams{g, sigma2}.validate();
        if (model == ModelKind::Fgn) FgnLogVolParams{nu, sigma2}.validate();
        if (model == ModelKind::Iid) StochasticVolParams{s}.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

PipelineConfig parse_config(std::istream& in) {
    PipelineConfig c;
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        const std::string where = "config line " + std::to_string(line_no) + ": ";
        if (eq == std::string::npos) throw ConfigError(where + "expected key=value");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");

        auto as_size = [&] {
            const auto v = parse_integer<std::size_t>(value);
            if (!v) throw ConfigError(where + key + " must be a non-negative integer");
            return *v;
        };
        auto as_double = [&] {
            const auto v = parse_double(value);
            if (!v || !std::isfinite(*v)) throw ConfigError(where + key + " must be a number");
            return *v;
        };

        if (key == "grid_m") c.grid_m = as_size();
        else if (key == "t_max") c.t_max = as_size();
        else if (key == "n_trials") c.n_trials = as_size();
        else if (key == "seed") {
            const auto v = parse_integer<std::uint64_t>(value);
            if (!v) throw ConfigError(where + "seed must be a non-negative integer");
            c.seed = *v;
        } else if (key == "model") c.model = parse_model_kind(value);
        else if (key == "sup_mode") {
            if (value == "grid") c.sup_mode = SupMode::Grid;
            else if (value == "bridge") c.sup_mode = SupMode::Bridge;
            else throw ConfigError(where + "sup_mode must be grid or bridge");
        } else if (key == "basis") {
            if (value == "reference") c.basis = BasisChoice::Reference;
            else if (value == "matched") c.basis = BasisChoice::Matched;
            else throw ConfigError(where + "basis must be reference or matched");
        } else if (key == "g") c.g = as_double();
        else if (key == "sigma2") c.sigma2 = as_double();
        else if (key == "nu") c.nu = as_double();
        else if (key == "s") c.s = as_double();
        else if (key == "n") c.n = as_size();
        else if (key == "replications") c.replications = as_size();
        else if (key == "input") c.input = value;
        else if (key == "output_dir") c.output_dir = value;
        else if (key == "save_lags") {
            c.save_lags.clear();
            for (const auto& item : split(value, ',')) {
                const auto v = parse_integer<std::size_t>(item);
                if (!v || *v == 0) throw ConfigError(where + "save_lags must be positive integers");
                c.save_lags.push_back(*v);
            }
        } else throw ConfigError(where + "unknown key '" + key + "'");
    }
    c.validate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    return parse_config(in);
}

std::string format_config(const PipelineConfig& c) {
    std::ostringstream out;
    out << "grid_m=" << c.grid_m << "\n"
        << "t_max=" << c.t_max << "\n"
        << "n_trials=" << c.n_trials << "\n";
    if (c.seed) out << "seed=" << *c.seed << "\n";
    out << "model=" << to_string(c.model) << "\n"
        << "sup_mode=" << to_string(c.sup_mode) << "\n"
        << "basis=" << (c.basis == BasisChoice::Reference ? "reference" : "matched") << "\n"
        << "g=" << format_double(c.g) << "\n"
        << "sigma2=" << format_double(c.sigma2) << "\n"
        << "nu=" << format_double(c.nu) << "\n"
        << "s=" << format_double(c.s) << "\n"
        << "n=" << c.n << "\n"
        << "replications=" << c.replications << "\n";
    if (!c.input.empty()) out << "input=" << c.input.string() << "\n";
    out << "output_dir=" << c.output_dir.string() << "\n";
    out << "save_lags=";
    for (std::size_t i = 0; i < c.save_lags.size(); ++i) out << (i ? "," : "") << c.save_lags[i];
    out << "\n";
    return out.str();
}

PanelData ingest_csv(const std::filesystem::path& path, const CsvOptions& options) {
    if (!std::filesystem::exists(path)) throw DataError("input file not found: " + path.string());
    auto in = open_input(path);
    std::string line;
    PanelData panel;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw DataError(path.string() + ": empty file");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    panel.names = split(trim(line), options.delimiter);
    std::set<std::string> unique;
    for (std::size_t c = 0; c < panel.names.size(); ++c) {
        if (panel.names[c].empty()) throw DataError(path.string() + ": header column " + std::to_string(c + 1) + " is empty");
        if (!unique.insert(panel.names[c]).second) throw DataError(path.string() + ": duplicate column name '" + panel.names[c] + "'");
    }
    panel.columns.assign(panel.names.size(), {});

    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++row;
        const auto cells = split(trim(line), options.delimiter);
        const std::string where = path.string() + ": row " + std::to_string(row) + " (line " + std::to_string(line_no) + ")";
        if (cells.size() != panel.names.size()) {
            throw DataError(where + " has " + std::to_string(cells.size()) + " cells, expected " + std::to_string(panel.names.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto v = parse_double(cells[c]);
            if (!v || !std::isfinite(*v)) {
                throw DataError(where + ", column " + std::to_string(c + 1) + " '" + panel.names[c] + "': " +
                                (cells[c].empty() ? std::string("empty cell") : "non-numeric value '" + cells[c] + "'"));
            }
            panel.columns[c].push_back(*v);
        }
    }
    if (row < 2) throw DataError(path.string() + ": fewer than 2 data rows");
    return panel;
}

void write_panel_csv(const std::filesystem::path& path, const PanelData& panel) {
    auto out = open_output(path);
    for (std::size_t c = 0; c < panel.names.size(); ++c) out << (c ? "," : "") << panel.names[c];
    out << "\n";
    for (std::size_t r = 0; r < panel.length(); ++r) {
        for (std::size_t c = 0; c < panel.columns.size(); ++c) out << (c ? "," : "") << format_double(panel.columns[c][r]);
        out << "\n";
    }
}

PanelData standardize(const PanelData& panel) {
    PanelData out = panel;
    for (std::size_t c = 0; c < out.columns.size(); ++c) {
        auto& col = out.columns[c];
        if (col.size() < 2) throw DataError("column '" + out.names[c] + "' has fewer than 2 values");
        const double n = static_cast<double>(col.size());
        double mean = 0.0;
        for (double v : col) mean += v;
        mean /= n;
        double ss = 0.0;
        for (double v : col) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / (n - 1.0));
        if (!(sd > 0.0)) throw DataError("column '" + out.names[c] + "' is constant");
        for (double& v : col) v = (v - mean) / sd;
    }
    return out;
}

void write_matrix_csv(const std::filesystem::path& path, const MatrixArtifact& a) {
    auto out = open_output(path);
    out << "# depgof " << a.kind << " m=" << a.m << " lag=" << a.lag << "\n";
    for (Eigen::Index r = 0; r < a.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.values.cols(); ++c) out << (c ? "," : "") << format_double(a.values(r, c));
        out << "\n";
    }
}

MatrixArtifact read_matrix_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
    const auto [kind, fields] = parse_header(line, path);
    MatrixArtifact a;
    a.kind = kind;
    a.m = header_size(fields, "m", path);
    a.lag = header_size(fields, "lag", path);
    const auto rows = read_numeric_rows(in, path, 1);
    if (rows.empty()) throw DataError(path.string() + ": no matrix rows");
    const std::size_t cols = rows.front().size();
    a.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw DataError(path.string() + ": ragged matrix at data row " + std::to_string(r + 1));
        for (std::size_t c = 0; c < cols; ++c) a.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return a;
}

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s) {
    MatrixArtifact a{"spectrum", s.grid.size(), 0, Eigen::MatrixXd(s.eigenvectors.rows() + 1, s.eigenvectors.cols())};
    a.values.row(0) = s.eigenvalues.transpose();
    a.values.bottomRows(s.eigenvectors.rows()) = s.eigenvectors;
    write_matrix_csv(path, a);
}

Spectrum read_spectrum_csv(const std::filesystem::path& path) {
    const MatrixArtifact a = read_matrix_csv(path);
    if (a.kind != "spectrum") throw DataError(path.string() + ": expected a spectrum artifact, found " + a.kind);
    if (static_cast<std::size_t>(a.values.rows()) != a.m + 1) throw DataError(path.string() + ": spectrum row count does not match m");
    return Spectrum{QuantileGrid(a.m), a.values.row(0).transpose(), a.values.bottomRows(static_cast<Eigen::Index>(a.m))};
}

void write_distribution_csv(const std::filesystem::path& path, const StatisticDistribution& d) {
    auto out = open_output(path);
    out << "# depgof law kind=" << to_string(d.kind) << " m=" << d.grid_m << " trials=" << d.n_trials()
        << " sup=" << to_string(d.sup_mode) << " digest=" << (d.spectrum_digest.empty() ? "-" : d.spectrum_digest) << "\n";
    for (double v : d.samples) out << format_double(v) << "\n";
}

StatisticDistribution read_distribution_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
    const auto [kind, fields] = parse_header(line, path);
    if (kind != "law") throw DataError(path.string() + ": expected a law artifact, found " + kind);
    StatisticDistribution d;
    const auto stat = fields.count("kind") ? fields.at("kind") : "";
    if (stat == "ks") d.kind = StatisticKind::KS;
    else if (stat == "cm") d.kind = StatisticKind::CM;
    else throw DataError(path.string() + ": unknown statistic kind '" + stat + "'");
    d.grid_m = header_size(fields, "m", path);
    const std::size_t trials = header_size(fields, "trials", path);
    d.sup_mode = fields.count("sup") && fields.at("sup") == "grid" ? SupMode::Grid : SupMode::Bridge;
    d.spectrum_digest = fields.count("digest") && fields.at("digest") != "-" ? fields.at("digest") : "";
    for (const auto& row : read_numeric_rows(in, path, 1)) {
        if (row.size() != 1) throw DataError(path.string() + ": law files have a single column");
        d.samples.push_back(row[0]);
    }
    if (d.samples.size() != trials) throw DataError(path.string() + ": sample count does not match header");
    if (!std::is_sorted(d.samples.begin(), d.samples.end())) throw DataError(path.string() + ": samples are not sorted");
    return d;
}

void write_results_jsonl(const std::filesystem::path& path, const std::vector<GofRecord>& records) {
    auto out = open_output(path);
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["name"] = r.name;
        j["ks"] = r.result.ks_stat;
        j["cm"] = r.result.cm_stat;
        j["p_ks"] = r.result.ks_p;
        j["p_cm"] = r.result.cm_p;
        j["n"] = r.result.n;
        out << j.dump() << "\n";
    }
}

std::vector<GofRecord> read_results_jsonl(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<GofRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            GofRecord r;
            r.name = j.at("name").get<std::string>();
            r.result.ks_stat = j.at("ks").get<double>();
            r.result.cm_stat = j.at("cm").get<double>();
            r.result.ks_p = j.at("p_ks").get<double>();
            r.result.cm_p = j.at("p_cm").get<double>();
            r.result.n = j.value("n", std::size_t{0});
            records.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

}  // namespace depgof
