#ifndef CELLSCOPE_STORE_MAPPED_FILE_HPP
#define CELLSCOPE_STORE_MAPPED_FILE_HPP

#include "../error.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>

namespace cellscope::store {

/**
 * Read-only memory mapping of a whole file.
 */
class MappedFile {
public:
    explicit MappedFile(const std::filesystem::path& path) {
        const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
        if (fd < 0) {
            throw Error(ErrorKind::FileNotReadable, "cannot open " + path.string());
        }
        struct stat st;
        if (::fstat(fd, &st) != 0) {
            ::close(fd);
            throw Error(ErrorKind::FileNotReadable, "cannot stat " + path.string());
        }
        size_ = static_cast<std::size_t>(st.st_size);
        if (size_ > 0) {
            void* p = ::mmap(nullptr, size_, PROT_READ, MAP_PRIVATE, fd, 0);
            if (p == MAP_FAILED) {
                ::close(fd);
                throw Error(ErrorKind::IoFailure, "cannot map " + path.string());
            }
            data_ = static_cast<const std::uint8_t*>(p);
        }
        ::close(fd);
    }

    MappedFile(const MappedFile&) = delete;
    MappedFile& operator=(const MappedFile&) = delete;
    MappedFile(MappedFile&& other) noexcept : data_(std::exchange(other.data_, nullptr)), size_(std::exchange(other.size_, 0)) {}
    MappedFile& operator=(MappedFile&& other) noexcept {
        if (this != &other) {
            release();
            data_ = std::exchange(other.data_, nullptr);
            size_ = std::exchange(other.size_, 0);
        }
        return *this;
    }
    ~MappedFile() { release(); }

    std::span<const std::uint8_t> bytes() const { return {data_, size_}; }
    std::size_t size() const { return size_; }

private:
    void release() {
        if (data_) {
            ::munmap(const_cast<std::uint8_t*>(data_), size_);
            data_ = nullptr;
        }
    }

    const std::uint8_t* data_ = nullptr;
    std::size_t size_ = 0;
};

}

#endif
