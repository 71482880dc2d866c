#pragma once

// Pinned output formatting: 17 significant digits, '.' decimal separator,
// Unix newlines — byte-identical artifacts across runs are part of the
// contract. Files are staged to a temp path and renamed into place so a
// failed run never leaves a partial artifact behind.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "config.hpp"

namespace starstab {

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

class StagedFile {
public:
    explicit StagedFile(std::string path)
        : final_(std::move(path)), tmp_(final_ + ".tmp") {
        out_.open(tmp_, std::ios::binary);
        if (!out_) throw IoError("cannot open output file: " + tmp_);
    }
    ~StagedFile() {
        if (!committed_) {
            out_.close();
            std::error_code ec;
            std::filesystem::remove(tmp_, ec);
        }
    }
    std::ofstream& stream() { return out_; }
    void commit() {
        out_.flush();
        if (!out_) throw IoError("write failed: " + tmp_);
        out_.close();
        std::error_code ec;
        std::filesystem::rename(tmp_, final_, ec);
        if (ec) throw IoError("cannot finalize output file: " + final_);
        committed_ = true;
    }

private:
    std::string final_, tmp_;
    std::ofstream out_;
    bool committed_ = false;
};

inline void write_csv(StagedFile& f, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
    auto& o = f.stream();
    for (std::size_t c = 0; c < header.size(); ++c)
        o << header[c] << (c + 1 < header.size() ? "," : "\n");
    const std::size_t rows = columns.empty() ? 0 : columns[0].size();
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < columns.size(); ++c)
            o << fmt17(columns[c][r]) << (c + 1 < columns.size() ? "," : "\n");
}

}  // namespace starstab
