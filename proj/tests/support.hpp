#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <string_view>

namespace testing_support {

inline std::filesystem::path source_dir() { return COLIEE_SOURCE_DIR; }
inline std::filesystem::path fixture(std::string_view rel) { return source_dir() / "tests" / "fixtures" / rel; }

/// Fresh directory removed on destruction.
class TempDir {
  public:
    TempDir()
    {
        static std::mt19937_64 gen{std::random_device{}()};
        m_path = std::filesystem::temp_directory_path() / ("coliee-test-" + std::to_string(gen()));
        std::filesystem::create_directories(m_path);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(m_path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return m_path; }
    std::filesystem::path operator/(std::string_view rel) const { return m_path / rel; }

  private:
    std::filesystem::path m_path;
};

inline void write(const std::filesystem::path& path, std::string_view contents)
{
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << contents;
}

}  // namespace testing_support
