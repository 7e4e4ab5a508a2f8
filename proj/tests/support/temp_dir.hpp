#ifndef CELLSCOPE_TESTS_TEMP_DIR_HPP
#define CELLSCOPE_TESTS_TEMP_DIR_HPP

#include <unistd.h>

#include "cellscope/error.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <string>

namespace cellscope_test {

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "cellscope") {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() / (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::string out;
    if (FILE* f = std::fopen(p.c_str(), "rb")) {
        char buf[65536];
        std::size_t n;
        while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) {
            out.append(buf, n);
        }
        std::fclose(f);
    }
    return out;
}

template<class Fn>
bool throws_kind(cellscope::ErrorKind kind, Fn&& fn) {
    try {
        fn();
    } catch (const cellscope::Error& e) {
        return e.kind() == kind;
    }
    return false;
}

}

#endif
