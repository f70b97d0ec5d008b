#include "hjm/report.hpp"

#include <openssl/sha.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace hjm {

namespace {

// Shortest round-trip form: locale-free and platform-stable.
std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf.data(), end);
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::string git_blob_sha1(const std::string& content) {
    std::string blob = "blob " + std::to_string(content.size());
    blob.push_back('\0');
    blob += content;
    unsigned char digest[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned char b : digest) {
        out += hex[b >> 4];
        out += hex[b & 15];
    }
    return out;
}

std::string curves_csv(const SolutionEnsemble& e, const WeightGrid& grid, std::size_t max_paths) {
    std::string out = "path_id,t,x,u\n";
    const std::size_t paths = std::min(max_paths, e.n_paths);
    for (std::size_t p = 0; p < paths; ++p)
        for (std::size_t j = 0; j < e.n_times; ++j) {
            auto c = e.curve(p, j);
            const std::string prefix = std::to_string(p) + "," + num(static_cast<double>(j) * e.dt) + ",";
            for (std::size_t i = 0; i < c.size(); ++i) out += prefix + num(grid.nodes()[i]) + "," + num(c[i]) + "\n";
        }
    return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out = "t,H2_script,H2_bb,se,n_alive\n";
    for (const auto& r : rows)
        out += num(r.t) + "," + num(r.h2_script) + "," + num(r.h2_bb) + "," + num(r.se) + "," +
               std::to_string(r.n_alive) + "\n";
    return out;
}

std::string checks_csv(const std::vector<CheckReport>& checks) {
    std::string out = "name,kind,lhs,rhs,ratio,n_samples,standard_error,tol,pass,detail\n";
    for (const auto& c : checks)
        out += quoted(c.name) + "," + (c.kind == CheckKind::identity ? "identity" : "inequality") + "," + num(c.lhs) +
               "," + num(c.rhs) + "," + num(c.ratio) + "," + std::to_string(c.n_samples) + "," +
               num(c.standard_error) + "," + num(c.tol) + "," + (c.pass ? "true" : "false") + "," + quoted(c.detail) +
               "\n";
    return out;
}

std::string manifest_json(const Scenario& sc, const std::string& command,
                          const std::vector<std::pair<std::string, std::string>>& files) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config_origin"] = sc.origin;
    j["config_sha1"] = git_blob_sha1(sc.source);
    j["seed"] = sc.solver.seed;
    j["config"] = sc.source;
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (const auto& [name, content] : files) out[name] = git_blob_sha1(content);
    j["outputs_sha1"] = out;
    return j.dump(2) + "\n";
}

void emit_report(const Scenario& sc, const RunResult& result, const std::filesystem::path& out_dir,
                 const std::string& command) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir))
        throw std::runtime_error("cannot create output directory " + out_dir.string());
    const WeightGrid grid = sc.grid();
    const std::vector<std::pair<std::string, std::string>> files = {
        {"curves.csv", curves_csv(result.ensemble, grid, sc.curve_paths)},
        {"summary.csv", summary_csv(result.summary)},
        {"checks.csv", checks_csv(result.checks)},
    };
    for (const auto& [name, content] : files) write_file(out_dir / name, content);
    write_file(out_dir / "manifest.json", manifest_json(sc, command, files));
}

}  // namespace hjm
