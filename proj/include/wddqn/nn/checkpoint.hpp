#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "wddqn/core/error.hpp"
#include "wddqn/nn/dense_net.hpp"

// Binary parameter checkpoint, all integers and floats little-endian:
//
//   magic        4 bytes  "WDQN"
//   version      u32      1
//   scalar_bytes u32      4 (binary32) or 8 (binary64)
//   n_sizes      u32      number of layer sizes (layers + 1)
//   sizes        u32[n_sizes]
//   per layer l: weights, sizes[l] x sizes[l+1] row-major (fan_in major),
//                then bias, sizes[l+1] values
//
// Values are the exact IEEE-754 bit patterns, so save/load round-trips bit-exact.
namespace wddqn::nn {

namespace detail {

template <typename UInt>
void write_le(std::ostream& out, UInt v) {
  std::array<char, sizeof(UInt)> bytes{};
  for (std::size_t i = 0; i < sizeof(UInt); ++i)
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

template <typename UInt>
UInt read_le(std::istream& in) {
  std::array<unsigned char, sizeof(UInt)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw Error("checkpoint truncated");
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(bytes[i]) << (8 * i);
  return v;
}

template <typename Scalar>
using bits_t = std::conditional_t<sizeof(Scalar) == 4, std::uint32_t, std::uint64_t>;

}  // namespace detail

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename Scalar>
void save_params(const DenseNet<Scalar>& net, std::ostream& out) {
  static_assert(sizeof(Scalar) == 4 || sizeof(Scalar) == 8);
  out.write("WDQN", 4);
  detail::write_le<std::uint32_t>(out, kCheckpointVersion);
  detail::write_le<std::uint32_t>(out, sizeof(Scalar));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(net.layer_sizes().size()));
  for (int s : net.layer_sizes()) detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s));
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const auto& layer = net.layer(l);
    // Matrix is row-major, so data() is already fan_in-major.
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i)
      detail::write_le(out, std::bit_cast<detail::bits_t<Scalar>>(layer.weights.data()[i]));
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i)
      detail::write_le(out, std::bit_cast<detail::bits_t<Scalar>>(layer.bias.data()[i]));
  }
  if (!out) throw Error("failed writing checkpoint");
}

template <typename Scalar>
DenseNet<Scalar> load_params(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || std::string(magic.data(), 4) != "WDQN") throw Error("not a WDQN checkpoint");
  if (detail::read_le<std::uint32_t>(in) != kCheckpointVersion)
    throw Error("unsupported checkpoint version");
  if (detail::read_le<std::uint32_t>(in) != sizeof(Scalar))
    throw Error("checkpoint scalar width does not match");
  const auto n = detail::read_le<std::uint32_t>(in);
  if (n < 2 || n > 64) throw Error("implausible layer count in checkpoint");
  std::vector<int> sizes;
  for (std::uint32_t i = 0; i < n; ++i) sizes.push_back(static_cast<int>(detail::read_le<std::uint32_t>(in)));
  DenseNet<Scalar> net(sizes);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    auto& layer = net.layer(l);
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i)
      layer.weights.data()[i] = std::bit_cast<Scalar>(detail::read_le<detail::bits_t<Scalar>>(in));
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i)
      layer.bias.data()[i] = std::bit_cast<Scalar>(detail::read_le<detail::bits_t<Scalar>>(in));
  }
  return net;
}

}  // namespace wddqn::nn
