#pragma once

// Shared test fixtures: the two-athlete chart and self-cleaning scratch
// directories.

#include <unistd.h>

#include <filesystem>
#include <string>

#include "chartfc/chart.hpp"

namespace testutil {

inline chartfc::SubTable athlete_subtable(int rows = 2) {
  chartfc::SubTable st;
  st.category_header = "athlete";
  st.value_header = "rank";
  static const char* names[] = {"usain bolt",  "andy stanfield", "carl lewis",
                                "jesse owens", "allan wells",    "harold abrahams"};
  for (int i = 0; i < rows; ++i) {
    chartfc::SubTableRow row;
    row.category = names[i];
    row.value = i + 1;
    row.value_text = std::to_string(i + 1);
    st.rows.push_back(row);
  }
  return st;
}

inline chartfc::ChartSpec athlete_spec(chartfc::Orientation o, int rows = 2) {
  chartfc::ChartSpec spec;
  spec.subtable = athlete_subtable(rows);
  spec.style.orientation = o;
  return spec;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("chartfc_test_" + tag + "_" + std::to_string(getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string sub(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
