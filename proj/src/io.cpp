#include "rrsim/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rrsim {

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  std::fprintf(f, "t");
  for (int i = 1; i <= traj.dim(); ++i) std::fprintf(f, ",x%d", i);
  std::fprintf(f, ",active\n");
  for (std::size_t r = 0; r < traj.size(); ++r) {
    std::fprintf(f, "%.17g", traj.times[r]);
    const StateVec& x = traj.states[r];
    for (Eigen::Index i = 0; i < x.size(); ++i) std::fprintf(f, ",%.17g", x(i));
    std::fprintf(f, ",%d\n", traj.active[r]);
  }
  std::fclose(f);
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trajectory file " + path.string());

  int dim = -1;  // columns between t and active
  {
    std::stringstream hs(line);
    std::string field;
    while (std::getline(hs, field, ',')) ++dim;
    --dim;
  }
  if (dim < 1) throw std::runtime_error("malformed trajectory header in " + path.string());

  Trajectory traj;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string field;
    std::getline(ls, field, ',');
    traj.times.push_back(std::stod(field));
    StateVec x(dim);
    for (int i = 0; i < dim; ++i) {
      std::getline(ls, field, ',');
      x(i) = std::stod(field);
    }
    traj.states.push_back(std::move(x));
    std::getline(ls, field, ',');
    traj.active.push_back(std::stoi(field));
  }
  return traj;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
}

}  // namespace rrsim
