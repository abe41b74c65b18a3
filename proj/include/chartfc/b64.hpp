#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace chartfc {

std::string b64_encode(const std::vector<uint8_t>& data);
// Rejects characters outside the alphabet and bad padding.
std::vector<uint8_t> b64_decode(const std::string& text);

}  // namespace chartfc
