#pragma once

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "decoy/corpus.hpp"
#include "decoy/textprep.hpp"
#include "oracles/synthetic.hpp"

namespace testsupport {

namespace fs = std::filesystem;

struct temp_dir {
    fs::path path;
    temp_dir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path = fs::temp_directory_path() /
               ("decoy_" + std::string(info->test_suite_name()) + "_" + info->name() + "_" +
                std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~temp_dir() { fs::remove_all(path); }
    [[nodiscard]] std::string file(const std::string& name) const { return (path / name).string(); }
    std::string write(const std::string& name, const std::string& content) const {
        std::ofstream(path / name, std::ios::binary) << content;
        return file(name);
    }
};

inline decoy::feature_space space_of(std::vector<std::string> terms) {
    std::sort(terms.begin(), terms.end());
    nlohmann::json j{{"format", "decoy.feature_space"}, {"version", 1},  {"ngram_min", 1},
                     {"ngram_max", 3},                   {"min_doc_fraction", 0.0}, {"nzv_freq_ratio", 19.0},
                     {"nzv_unique_pct", 10.0},           {"apply_nzv", false},     {"n_train_docs", 1},
                     {"min_doc_count", 0},               {"pre_nzv_count", terms.size()},
                     {"post_nzv_count", terms.size()},   {"terms", terms},
                     {"doc_freq", std::vector<std::uint32_t>(terms.size(), 1)}};
    return decoy::feature_space::from_json(j);
}

inline std::vector<std::string> lines_of(const std::string& content) {
    std::vector<std::string> out;
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(line);
    return out;
}

using decoy_synthetic::synthetic_corpus;

}  // namespace testsupport
