#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "doctest.h"
#include "plmcurate/error.hpp"

#define CHECK_ERRC(expr, errc)                                      \
    do {                                                            \
        bool thrown_ = false;                                       \
        try {                                                       \
            (void)(expr);                                           \
        } catch (const plmc::Error& e_) {                           \
            thrown_ = true;                                         \
            CHECK_MESSAGE(e_.code() == (errc), e_.what());          \
        }                                                           \
        CHECK_MESSAGE(thrown_, "expected " #errc);                  \
    } while (0)

// Fresh scratch directory under the system temp dir, removed on scope exit.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("plmcurate_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};
