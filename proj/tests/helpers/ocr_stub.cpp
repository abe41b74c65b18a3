// Test double for the ocr adapter protocol. Instead of running real
// ocr it replies with the text regions stored in a chart sidecar, so
// the transport and the reply parser can be exercised end to end.
//
//   ocr_stub SIDECAR            well-formed reply
//   ocr_stub SIDECAR --wrong-id reply for a different request
//   ocr_stub SIDECAR --garbage  reply that is not json
//   ocr_stub SIDECAR --fail     exit nonzero without replying

#include <iostream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "chartfc/chart.hpp"
#include "chartfc/image.hpp"

int main(int argc, char** argv) {
  if (argc < 2) return 1;
  const std::string mode = argc > 2 ? argv[2] : "";

  std::ostringstream buf;
  buf << std::cin.rdbuf();
  if (mode == "--fail") return 3;
  if (mode == "--garbage") {
    std::cout << "this is not json";
    return 0;
  }

  nlohmann::json request = nlohmann::json::parse(buf.str());
  const chartfc::Sidecar sc =
      chartfc::sidecar_from_json(chartfc::read_file_text(argv[1]));
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& r : sc.regions)
    regions.push_back(
        {{"text", r.text}, {"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}});
  nlohmann::json reply = {
      {"request_id", mode == "--wrong-id"
                         ? std::string("0000000000000000")
                         : request.at("request_id").get<std::string>()},
      {"regions", regions}};
  std::cout << reply.dump();
  return 0;
}
