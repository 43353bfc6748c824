#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "narrbench/dataset.hpp"

namespace testing_support {

inline const std::filesystem::path kData = NARRBENCH_TEST_DATA;

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << body;
}

inline narrbench::Problem stdin_problem(const std::string& id, std::vector<narrbench::TestCase> examples,
                                        std::vector<narrbench::TestCase> hidden = {}) {
    narrbench::Problem p;
    p.id = id;
    p.statement = "statement of " + id;
    p.statement_length = p.statement.size();
    p.io_mode = narrbench::IoMode::StdinStdout;
    p.examples = std::move(examples);
    p.hidden_tests = std::move(hidden);
    return p;
}

}  // namespace testing_support
