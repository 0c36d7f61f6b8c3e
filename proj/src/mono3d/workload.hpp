#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mono3d {

// One convolutional layer. Non-MAC layers (pooling, activations, residual
// adds) are not represented; topology files list conv/GEMM layers only.
struct layer_spec {
    std::string name;
    int ifmap_h = 0;
    int ifmap_w = 0;
    int filter_h = 0;
    int filter_w = 0;
    int channels = 0;
    int num_filters = 0;
    int stride = 1;
    int padding = 0;  // optional per-row override; applied to both axes

    void validate(const std::string& where) const;
};

struct network_spec {
    std::string name;
    std::vector<layer_spec> layers;
};

// im2col view of one layer: out = [m x n], reduction length k.
struct gemm_dims {
    std::int64_t m = 0;
    std::int64_t k = 0;
    std::int64_t n = 0;
    std::int64_t macs() const { return m * k * n; }
};

// Valid-padding convolution arithmetic (plus the optional padding field).
std::pair<int, int> output_dims(const layer_spec& layer);
gemm_dims lower_to_gemm(const layer_spec& layer);
std::int64_t network_macs(const network_spec& net);

// Topology CSV: header row then one layer per row,
//   Layer name, IFMAP Height, IFMAP Width, Filter Height, Filter Width,
//   Channels, Num Filter, Strides[, Padding],
// Trailing comma tolerated; whitespace trimmed.
network_spec load_network(const std::filesystem::path& path);
network_spec parse_network(std::istream& in, const std::string& name);
void save_network(const network_spec& net, std::ostream& out);

}  // namespace mono3d
