#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "wddqn/core/error.hpp"
#include "wddqn/lenient/leniency.hpp"
#include "wddqn/nn/checkpoint.hpp"

// Agent checkpoints are a directory of network files in the binary parameter
// format plus key-value CSV tables.
namespace wddqn::agents::io {

template <typename Scalar>
void save_net(const nn::DenseNet<Scalar>& net, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot open " + file.string() + " for writing");
  nn::save_params(net, out);
}

template <typename Scalar>
nn::DenseNet<Scalar> load_net(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot open " + file.string());
  return nn::load_params<Scalar>(in);
}

inline void save_temperatures(const lenient::TemperatureTable& table, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error("cannot open " + file.string() + " for writing");
  out.precision(17);
  out << "state_key,action,temperature\n";
  table.for_each([&](std::uint64_t s, int a, double t) { out << s << ',' << a << ',' << t << '\n'; });
}

inline void load_temperatures(lenient::TemperatureTable& table, const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open " + file.string());
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::uint64_t s = 0;
    int a = 0;
    double t = 0.0;
    char comma = 0;
    if (!(row >> s >> comma >> a >> comma >> t)) throw Error("malformed temperature row: " + line);
    table.set(s, a, t);
  }
}

inline void save_reward_stats(const lenient::RewardStats& stats, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error("cannot open " + file.string() + " for writing");
  out.precision(17);
  out << "state_key,action,count,mean\n";
  stats.for_each([&](std::uint64_t s, int a, const lenient::RewardStats::Entry& e) {
    out << s << ',' << a << ',' << e.count << ',' << e.mean << '\n';
  });
}

inline void load_reward_stats(lenient::RewardStats& stats, const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open " + file.string());
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::uint64_t s = 0;
    std::uint64_t n = 0;
    int a = 0;
    double mean = 0.0;
    char comma = 0;
    if (!(row >> s >> comma >> a >> comma >> n >> comma >> mean)) throw Error("malformed reward row: " + line);
    stats.restore(s, a, n, mean);
  }
}

}  // namespace wddqn::agents::io
