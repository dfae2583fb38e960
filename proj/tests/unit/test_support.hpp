/**
 * Copyright 2026 The trustscreen Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace ts_test {

/// Scratch file removed on destruction.
class TempFile {
public:
    explicit TempFile(const std::string& contents, const std::string& suffix = ".txt") {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("trustscreen_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + suffix);
        std::ofstream(path_, std::ios::binary) << contents;
    }
    ~TempFile() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    TempFile(const TempFile&) = delete;
    TempFile& operator=(const TempFile&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("trustscreen_dir_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, sd);
    std::vector<double> out(n);
    for (auto& v : out) v = z(rng);
    return out;
}

inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
    auto e = white_noise(n, seed);
    for (std::size_t i = 1; i < n; ++i) e[i] += e[i - 1];
    return e;
}

/// Stationary AR(1) around `mean`, with a 200-step burn-in.
inline std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed, double mean = 0.0) {
    const auto e = white_noise(n + 200, seed);
    std::vector<double> x(n + 200, 0.0);
    for (std::size_t t = 1; t < x.size(); ++t) x[t] = phi * x[t - 1] + e[t];
    std::vector<double> out(x.begin() + 200, x.end());
    for (auto& v : out) v += mean;
    return out;
}

}  // namespace ts_test

