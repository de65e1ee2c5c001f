#pragma once

#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

#include "kwsum/errors.hpp"

namespace kwsum {

// Calls fn(line_number, object) for each non-empty line. Malformed JSON
// raises a DataError naming the line.
inline void for_each_jsonl(const std::string& path,
                           const std::function<void(long, const nlohmann::json&)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError(path + ": malformed JSON at line " + std::to_string(line_no) + ": " +
                            e.what());
        }
        fn(line_no, obj);
    }
}

} // namespace kwsum
