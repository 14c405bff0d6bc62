#include "support.hpp"

#include <codegraph/enrich/provider.hpp>
#include <codegraph/service/pipeline.hpp>

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cgtest {

std::filesystem::path fixtures_dir() {
    return CODEGRAPH_FIXTURES_DIR;
}

std::filesystem::path orders_dir() {
    return fixtures_dir() / "orders";
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

TempDir::TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    const auto base = std::filesystem::temp_directory_path();
    for (;;) {
        path_ = base / (tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        if (std::filesystem::create_directories(path_)) break;
    }
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

service::SystemConfig orders_config(const std::filesystem::path& snapshot) {
    auto config = service::load_config(orders_dir() / "system.json");
    config.snapshot = snapshot;
    return config;
}

CodeGraph build_orders_mock() {
    enrich::MockProvider provider;
    return service::run_build(orders_config(), provider).graph;
}

} // namespace cgtest
