#include "sparsepose/flops.hpp"

#include <fstream>

namespace sparsepose {

void write_flops_csv(const std::string& path, const std::string& backbone,
                     const FlopsReport& report, const std::string& config_echo) {
    std::ofstream os(path);
    if (!os) throw data_error("flops csv: cannot open '" + path + "'");
    os << "# config: " << config_echo << "\n";
    os << "backbone,layer,kind,kh,kw,cin,cout,dense_flops,sparse_flops,pairs,"
          "active_out,reduction\n";
    for (const auto& l : report.layers) {
        const double red =
            l.dense_flops > 0 ? 1.0 - static_cast<double>(l.sparse_flops) / l.dense_flops
                              : 0.0;
        os << backbone << "," << l.index << "," << l.kind << "," << l.kernel_h << ","
           << l.kernel_w << "," << l.in_channels << "," << l.out_channels << ","
           << l.dense_flops << "," << l.sparse_flops << "," << l.pairs << ","
           << l.active_out << "," << red << "\n";
    }
    os << backbone << ",total,,,,,," << report.dense_total << "," << report.sparse_total
       << ",,," << report.reduction() << "\n";
}

}  // namespace sparsepose
