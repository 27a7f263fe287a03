#ifndef NDPP_SERIALIZE_HPP
#define NDPP_SERIALIZE_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ndpp/ndpp_layer.hpp"

namespace ndpp {

inline constexpr char kLayerFileMagic[8] = {'N', 'D', 'P', 'P', 'L', 'A', 'Y', 'R'};
inline constexpr std::uint32_t kLayerFileVersion = 1;

// Layout (all integers and floats little-endian):
//   magic[8] "NDPPLAYR", u32 version, u32 layer count, then per layer
//     config fields in NdppLayerConfig declaration order
//       (enums as u32, sizes as u64, doubles as f64, int as i32, bools as u8),
//     u64 n + n f64 weight values (row-major d x out),
//     u64 n + n f64 bias values (n = 0 when there is no separate bias),
//     u64 block count, then per block u64 size B + B*B f64 running D.
// Loading yields layers in training mode whose running D is restored.

void save_layers(std::ostream& out, std::span<const NdppLayer* const> layers);
std::vector<NdppLayer> load_layers(std::istream& in);

void save_layers(const std::string& path, std::span<const NdppLayer* const> layers);
std::vector<NdppLayer> load_layers(const std::string& path);

}  // namespace ndpp

#endif  // NDPP_SERIALIZE_HPP
