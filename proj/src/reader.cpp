#include "chartfc/reader.hpp"

#include <algorithm>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>

#include <sys/wait.h>
#include <unistd.h>

#include "httplib.h"
#include "json.hpp"

#include "chartfc/b64.hpp"
#include "chartfc/errors.hpp"
#include "chartfc/image.hpp"
#include "chartfc/rng.hpp"

namespace chartfc {
namespace {

using nlohmann::json;

// Bands and annotation alignment share one pixel tolerance; rendered
// geometry is exact, the slack absorbs reader jitter.
constexpr double kAlignTol = 6.0;

std::string hex64(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 15];
    v >>= 4;
  }
  return out;
}

// Runs a command with the request on stdin and collects stdout. The
// adapter must read its whole stdin before replying, the request fits a
// pipe only with a consumer on the other end.
std::string run_exec_adapter(const std::string& cmd, const std::string& request) {
  std::signal(SIGPIPE, SIG_IGN);
  int to_child[2], from_child[2];
  if (pipe(to_child) != 0) throw AdapterUnreachable("pipe failed");
  if (pipe(from_child) != 0) {
    close(to_child[0]);
    close(to_child[1]);
    throw AdapterUnreachable("pipe failed");
  }
  pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) close(fd);
    throw AdapterUnreachable("fork failed");
  }
  if (pid == 0) {
    dup2(to_child[0], 0);
    dup2(from_child[1], 1);
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) close(fd);
    execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);

  size_t written = 0;
  bool write_ok = true;
  while (written < request.size()) {
    ssize_t n = write(to_child[1], request.data() + written, request.size() - written);
    if (n <= 0) {
      write_ok = false;
      break;
    }
    written += static_cast<size_t>(n);
  }
  close(to_child[1]);

  std::string reply;
  char buf[4096];
  for (;;) {
    ssize_t n = read(from_child[0], buf, sizeof buf);
    if (n <= 0) break;
    reply.append(buf, static_cast<size_t>(n));
  }
  close(from_child[0]);

  int status = 0;
  waitpid(pid, &status, 0);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
    throw AdapterUnreachable("adapter command failed: " + cmd);
  if (!write_ok && reply.empty())
    throw AdapterUnreachable("adapter closed its input: " + cmd);
  return reply;
}

std::vector<TextRegion> parse_adapter_reply(const std::string& body,
                                            const std::string& request_id) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw MalformedAdapterReply(std::string("adapter reply is not JSON: ") + e.what());
  }
  try {
    if (doc.at("request_id").get<std::string>() != request_id)
      throw MalformedAdapterReply("adapter echoed a different request_id");
    std::vector<TextRegion> regions;
    for (const auto& r : doc.at("regions")) {
      TextRegion t;
      t.text = r.at("text").get<std::string>();
      t.x = r.at("x").get<int>();
      t.y = r.at("y").get<int>();
      t.w = r.at("w").get<int>();
      t.h = r.at("h").get<int>();
      if (t.w < 0 || t.h < 0) throw MalformedAdapterReply("region with negative extent");
      regions.push_back(std::move(t));
    }
    return regions;
  } catch (const json::exception& e) {
    throw MalformedAdapterReply(std::string("adapter reply missing fields: ") + e.what());
  }
}

}  // namespace

ReadOutput read_oracle(const std::string& sidecar_path) {
  if (!std::filesystem::exists(sidecar_path))
    throw MissingSidecar("no sidecar at " + sidecar_path);
  Sidecar sc = sidecar_from_json(read_file_text(sidecar_path));
  ReadOutput out;
  out.canvas_w = sc.spec.canvas_w;
  out.canvas_h = sc.spec.canvas_h;
  for (const auto& r : sc.regions) out.regions.push_back({r.text, r.x, r.y, r.w, r.h});
  sort_reading_order(out.regions);
  return out;
}

ReadOutput read_ocr(const std::vector<uint8_t>& ppm_bytes, const std::string& endpoint) {
  Image img = Image::decode_ppm(ppm_bytes);
  std::string request_id = hex64(stable_hash(ppm_bytes));
  json request = {{"request_id", request_id},
                  {"image_format", "ppm"},
                  {"image_b64", b64_encode(ppm_bytes)}};
  std::string body = request.dump();

  std::string reply;
  if (endpoint.rfind("exec:", 0) == 0) {
    reply = run_exec_adapter(endpoint.substr(5), body);
  } else if (endpoint.rfind("http://", 0) == 0 || endpoint.rfind("https://", 0) == 0) {
    httplib::Client client(endpoint);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(30, 0);
    auto res = client.Post("/ocr", body, "application/json");
    if (!res) throw AdapterUnreachable("no response from " + endpoint);
    if (res->status != 200)
      throw AdapterUnreachable("adapter at " + endpoint + " returned status " +
                               std::to_string(res->status));
    reply = res->body;
  } else {
    throw InputError("ocr endpoint must be http(s):// or exec:, got " + endpoint);
  }

  ReadOutput out;
  out.canvas_w = img.width();
  out.canvas_h = img.height();
  out.regions = parse_adapter_reply(reply, request_id);
  sort_reading_order(out.regions);
  return out;
}

ReadOutput read_ocr_file(const std::string& image_path, const std::string& endpoint) {
  return read_ocr(read_file_bytes(image_path), endpoint);
}

ReadOutput perturb(const ReadOutput& input, const NoiseConfig& noise, uint64_t seed) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  Rng rng(seed);
  ReadOutput out;
  out.canvas_w = input.canvas_w;
  out.canvas_h = input.canvas_h;
  for (const auto& r : input.regions) {
    if (rng.bernoulli(noise.p_drop)) continue;
    TextRegion t = r;
    for (char& c : t.text)
      if (rng.bernoulli(noise.p_sub)) c = alphabet[rng.below(alphabet.size())];
    if (noise.jitter_px > 0) {
      int span = 2 * noise.jitter_px + 1;
      t.x += static_cast<int>(rng.below(span)) - noise.jitter_px;
      t.y += static_cast<int>(rng.below(span)) - noise.jitter_px;
    }
    out.regions.push_back(std::move(t));
  }
  sort_reading_order(out.regions);
  return out;
}

ClassifyResult classify_roles(const ReadOutput& input) {
  size_t n = input.regions.size();
  if (n < 4)
    throw Unclassifiable("need at least 4 regions, have " + std::to_string(n));

  // Work on indices; roles are written back in input order.
  std::vector<size_t> rest(n);
  for (size_t i = 0; i < n; ++i) rest[i] = i;
  auto reg = [&](size_t i) -> const TextRegion& { return input.regions[i]; };

  // Bottom-most region is the x-axis title.
  size_t title_x = rest[0];
  for (size_t i : rest) {
    if (reg(i).y_center() > reg(title_x).y_center() ||
        (reg(i).y_center() == reg(title_x).y_center() && reg(i).x < reg(title_x).x))
      title_x = i;
  }
  rest.erase(std::find(rest.begin(), rest.end(), title_x));

  // Left-most remaining region is the y-axis title.
  size_t title_y = rest[0];
  for (size_t i : rest) {
    if (reg(i).x_center() < reg(title_y).x_center() ||
        (reg(i).x_center() == reg(title_y).x_center() && reg(i).y < reg(title_y).y))
      title_y = i;
  }
  rest.erase(std::find(rest.begin(), rest.end(), title_y));

  // Bottom band: top edges aligned with the lowest remaining top edge.
  int max_top = reg(rest[0]).y;
  for (size_t i : rest) max_top = std::max(max_top, reg(i).y);
  std::vector<size_t> bottom, side;
  for (size_t i : rest)
    (reg(i).y >= max_top - kAlignTol ? bottom : side).push_back(i);

  // Left band: right edges aligned with the left-most remaining right edge.
  if (side.empty()) throw Unclassifiable("no regions between the axis bands");
  int min_right = reg(side[0]).x + reg(side[0]).w;
  for (size_t i : side) min_right = std::min(min_right, reg(i).x + reg(i).w);
  std::vector<size_t> left, in_plot;
  for (size_t i : side)
    (reg(i).x + reg(i).w <= min_right + kAlignTol ? left : in_plot).push_back(i);

  // Orientation: do in-plot annotations line up with the left band
  // (horizontal bars) or the bottom band (vertical bars)?
  auto closest = [&](const std::vector<size_t>& band, double want,
                     bool vertical_axis) -> std::pair<int, double> {
    int best = -1;
    double best_d = kAlignTol + 1;
    for (size_t k = 0; k < band.size(); ++k) {
      double have = vertical_axis ? reg(band[k]).y_center() : reg(band[k]).x_center();
      double d = std::abs(have - want);
      if (d < best_d) {
        best = static_cast<int>(k);
        best_d = d;
      }
    }
    if (best_d > kAlignTol) return {-1, 0};
    return {best, best_d};
  };

  int score_h = 0, score_v = 0;
  double dist_h = 0, dist_v = 0;
  for (size_t i : in_plot) {
    auto [hk, hd] = closest(left, reg(i).y_center(), true);
    if (hk >= 0) {
      ++score_h;
      dist_h += hd;
    }
    auto [vk, vd] = closest(bottom, reg(i).x_center(), false);
    if (vk >= 0) {
      ++score_v;
      dist_v += vd;
    }
  }
  if (score_h == 0 && score_v == 0)
    throw Unclassifiable("annotations align with neither axis band");
  if (score_h == score_v && dist_h == dist_v)
    throw Unclassifiable("orientation is ambiguous");
  bool horizontal = score_h > score_v || (score_h == score_v && dist_h < dist_v);

  const std::vector<size_t>& cats = horizontal ? left : bottom;
  const std::vector<size_t>& grid = horizontal ? bottom : left;
  if (cats.empty()) throw Unclassifiable("no category labels found");

  // Bar order: top-to-bottom for horizontal charts, left-to-right for
  // vertical ones.
  std::vector<size_t> cat_order(cats.begin(), cats.end());
  std::sort(cat_order.begin(), cat_order.end(), [&](size_t a, size_t b) {
    double ka = horizontal ? reg(a).y_center() : reg(a).x_center();
    double kb = horizontal ? reg(b).y_center() : reg(b).x_center();
    if (ka != kb) return ka < kb;
    return a < b;
  });
  std::vector<int> bar_of(n, -1);
  for (size_t k = 0; k < cat_order.size(); ++k) bar_of[cat_order[k]] = static_cast<int>(k);

  std::vector<ClassifiedRegion> out(n);
  for (size_t i = 0; i < n; ++i) out[i].region = input.regions[i];
  out[title_x].role = RegionRole::AxisTitleX;
  out[title_y].role = RegionRole::AxisTitleY;
  for (size_t i : cats) {
    out[i].role = RegionRole::TickCategory;
    out[i].bar_index = bar_of[i];
  }
  for (size_t i : grid) {
    out[i].role = RegionRole::TickValue;
    out[i].gridline = true;
  }
  for (size_t i : in_plot) {
    out[i].role = RegionRole::TickValue;
    double want = horizontal ? reg(i).y_center() : reg(i).x_center();
    auto [k, d] = closest(cat_order, want, horizontal);
    if (k >= 0) out[i].bar_index = static_cast<int>(k);
  }

  return {horizontal ? Orientation::Horizontal : Orientation::Vertical, std::move(out)};
}

}  // namespace chartfc
