#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "snakesim/model.hpp"

namespace snakesim::test {

inline std::string fixture(const std::string& name) {
  return std::string(SNAKESIM_FIXTURE_DIR) + "/" + name;
}

inline RobotModel default_model() { return load_model(fixture("model.json")); }
inline TunableParams nominal_params(const RobotModel& m) {
  return load_params(fixture("nominal.json"), m.joint_count);
}

// Fresh scratch directory under the build tree, cleaned on construction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() / ("snakesim_test_" + tag);
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

}  // namespace snakesim::test
