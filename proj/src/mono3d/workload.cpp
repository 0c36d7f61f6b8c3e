#include "mono3d/workload.hpp"

#include <fstream>
#include <ostream>

#include "mono3d/common.hpp"

namespace mono3d {

void layer_spec::validate(const std::string& where) const {
    auto positive = [&](int v, const char* field) {
        if (v < 1)
            throw parse_error(where + ": column '" + field + "' must be >= 1, got " +
                              std::to_string(v));
    };
    positive(ifmap_h, "IFMAP Height");
    positive(ifmap_w, "IFMAP Width");
    positive(filter_h, "Filter Height");
    positive(filter_w, "Filter Width");
    positive(channels, "Channels");
    positive(num_filters, "Num Filter");
    positive(stride, "Strides");
    if (padding < 0)
        throw parse_error(where + ": column 'Padding' must be >= 0");
    if (filter_h > ifmap_h + 2 * padding || filter_w > ifmap_w + 2 * padding)
        throw parse_error(where + ": filter exceeds padded ifmap (" +
                          std::to_string(filter_h) + "x" + std::to_string(filter_w) + " vs " +
                          std::to_string(ifmap_h + 2 * padding) + "x" +
                          std::to_string(ifmap_w + 2 * padding) + ")");
}

std::pair<int, int> output_dims(const layer_spec& l) {
    int eh = l.ifmap_h + 2 * l.padding;
    int ew = l.ifmap_w + 2 * l.padding;
    int oh = (eh - l.filter_h) / l.stride + 1;
    int ow = (ew - l.filter_w) / l.stride + 1;
    if (oh < 1 || ow < 1)
        throw validation_error("layer '" + l.name + "': output dimensions " + std::to_string(oh) +
                               "x" + std::to_string(ow) + " < 1");
    return {oh, ow};
}

gemm_dims lower_to_gemm(const layer_spec& l) {
    auto [oh, ow] = output_dims(l);
    gemm_dims g;
    g.m = static_cast<std::int64_t>(oh) * ow;
    g.k = static_cast<std::int64_t>(l.filter_h) * l.filter_w * l.channels;
    g.n = l.num_filters;
    return g;
}

std::int64_t network_macs(const network_spec& net) {
    std::int64_t total = 0;
    for (const auto& l : net.layers) total += lower_to_gemm(l).macs();
    return total;
}

network_spec load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open topology file " + path.string());
    return parse_network(in, path.stem().string());
}

network_spec parse_network(std::istream& in, const std::string& name) {
    network_spec net;
    net.name = name;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty()) continue;
        if (!header_seen) {  // header row required; content not interpreted
            header_seen = true;
            continue;
        }
        auto fields = split(t, ',');
        while (!fields.empty() && trim(fields.back()).empty()) fields.pop_back();
        const std::string where = name + " row " + std::to_string(lineno);
        if (fields.size() != 8 && fields.size() != 9)
            throw parse_error(where + ": expected 8 or 9 columns, got " +
                              std::to_string(fields.size()));
        layer_spec l;
        l.name = trim(fields[0]);
        if (l.name.empty()) throw parse_error(where + ": column 'Layer name' is empty");
        auto col = [&](int i, const char* field) {
            long long v = parse_int(fields[i], where + ", column '" + std::string(field) + "'");
            if (v > 1 << 28) throw parse_error(where + ": column '" + std::string(field) +
                                               "' is implausibly large");
            return static_cast<int>(v);
        };
        l.ifmap_h = col(1, "IFMAP Height");
        l.ifmap_w = col(2, "IFMAP Width");
        l.filter_h = col(3, "Filter Height");
        l.filter_w = col(4, "Filter Width");
        l.channels = col(5, "Channels");
        l.num_filters = col(6, "Num Filter");
        l.stride = col(7, "Strides");
        if (fields.size() == 9) l.padding = col(8, "Padding");
        l.validate(where);
        net.layers.push_back(std::move(l));
    }
    if (!header_seen) throw parse_error(name + ": missing header row");
    if (net.layers.empty()) throw parse_error(name + ": topology has no layers");
    return net;
}

void save_network(const network_spec& net, std::ostream& out) {
    bool pad = false;
    for (const auto& l : net.layers) pad |= l.padding != 0;
    out << "Layer name, IFMAP Height, IFMAP Width, Filter Height, Filter Width, "
           "Channels, Num Filter, Strides,";
    if (pad) out << " Padding,";
    out << "\n";
    for (const auto& l : net.layers) {
        out << l.name << ", " << l.ifmap_h << ", " << l.ifmap_w << ", " << l.filter_h << ", "
            << l.filter_w << ", " << l.channels << ", " << l.num_filters << ", " << l.stride
            << ",";
        if (pad) out << " " << l.padding << ",";
        out << "\n";
    }
}

}  // namespace mono3d
