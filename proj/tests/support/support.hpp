#pragma once

#include <codegraph/graph.hpp>
#include <codegraph/service/config.hpp>

#include <filesystem>
#include <string>

namespace cgtest {

using namespace codegraph;

std::filesystem::path fixtures_dir();
std::filesystem::path orders_dir();

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "cg");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

// The shipped orders fixture config with its snapshot redirected.
service::SystemConfig orders_config(const std::filesystem::path& snapshot = {});

// Structural + mock enrichment + embeddings of the orders fixture.
CodeGraph build_orders_mock();

} // namespace cgtest
