#pragma once

#include <string>
#include <vector>

namespace cavityg2 {

// Write via a temp file in the same directory and rename into place, so
// concurrent readers never observe a partial file.
void write_text_atomic(const std::string& path, const std::string& text);
void write_bytes_atomic(const std::string& path, const std::vector<unsigned char>& bytes);

std::string read_text(const std::string& path);

}  // namespace cavityg2
