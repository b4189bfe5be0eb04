#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "kads/cli/config.hpp"
#include "kads/cli/jobs.hpp"
#include "kads/parallel.hpp"

namespace fs = std::filesystem;

namespace {

bool write_all(const fs::path& dir, const std::map<std::string, std::string>& files) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        spdlog::error("cannot create {}: {}", dir.string(), ec.message());
        return false;
    }
    // stage everything first so a failed write leaves no partial artifact set
    std::vector<std::pair<fs::path, fs::path>> staged;
    for (const auto& [name, content] : files) {
        const fs::path tmp = dir / (name + ".tmp");
        std::ofstream os(tmp, std::ios::binary);
        os << content;
        if (!os) {
            spdlog::error("cannot write {}", tmp.string());
            for (const auto& s : staged) fs::remove(s.first, ec);
            fs::remove(tmp, ec);
            return false;
        }
        staged.emplace_back(tmp, dir / name);
    }
    for (const auto& [tmp, dst] : staged) fs::rename(tmp, dst, ec);
    return !ec;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stationary-mode finder for Kerr-AdS Teukolsky perturbations"};
    std::string config_path, out_dir = ".", log_level = "info";
    int jobs = kads::default_jobs();
    app.add_option("--config", config_path, "job configuration (JSON)")->required()->check(CLI::ExistingFile);
    app.add_option("--jobs", jobs, "worker threads for scans")->check(CLI::PositiveNumber);
    app.add_option("--out-dir", out_dir, "directory for artifacts");
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
    app.set_version_flag("--version", kads::cli::tool_version);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kads::cli::exit_config;
    }
    spdlog::set_level(spdlog::level::from_str(log_level));
    spdlog::set_pattern("[%l] %v");

    std::ifstream in(config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    kads::cli::JobConfig cfg;
    try {
        cfg = kads::cli::parse_config_text(ss.str());
    } catch (const kads::ConfigError& e) {
        spdlog::error("config: {}", e.what());
        return kads::cli::exit_config;
    }
    spdlog::info("{} (config {}) with {} job(s)", cfg.command, kads::cli::config_hash(cfg.source), jobs);

    const kads::cli::JobResult res = kads::cli::run_job(cfg, jobs);
    if (res.exit_code == kads::cli::exit_config) {
        spdlog::error("config: {}", res.error_message);
        return res.exit_code;
    }
    if (res.exit_code != kads::cli::exit_ok) spdlog::error("{}: {}", res.error_kind, res.error_message);
    if (!write_all(out_dir, res.files)) return kads::cli::exit_numerical;
    for (const auto& [name, content] : res.files) spdlog::debug("wrote {} ({} bytes)", (fs::path(out_dir) / name).string(), content.size());
    if (res.exit_code == kads::cli::exit_ok) spdlog::info("wrote {} artifact(s) to {}", res.files.size(), out_dir);
    return res.exit_code;
}
