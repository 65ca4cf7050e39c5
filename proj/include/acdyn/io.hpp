#pragma once

/// CSV export. Reals are written with 17 significant digits.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "acdyn/density.hpp"
#include "acdyn/diagnostics.hpp"
#include "acdyn/stepper.hpp"

namespace acdyn::io {

namespace fs = std::filesystem;

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << std::setprecision(17);
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  CsvWriter& row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << values[i];
    out_ << '\n';
    return *this;
  }

 private:
  std::ofstream out_;
};

inline void write_series(const fs::path& path, const Trajectory& traj) {
  CsvWriter w(path, {"t", "energy", "mass", "lambda", "res_bulk", "res_bnd"});
  for (const auto& r : traj) w.row({r.t, r.energy, r.k, r.lambda, r.residual_bulk, r.residual_bnd});
}

/// Bulk snapshot `x[,y],u` and boundary snapshot `s,u_gamma`.
inline void write_snapshot(const fs::path& bulk_path, const fs::path& bnd_path, const Domain& d,
                           const CoupledField& u) {
  const bool two_d = d.dim() == 2;
  CsvWriter wb(bulk_path, two_d ? std::vector<std::string>{"x", "y", "u"} : std::vector<std::string>{"x", "u"});
  for (int i = 0; i < d.num_nodes(); ++i)
    wb.row(two_d ? std::vector<double>{d.nodes[i][0], d.nodes[i][1], u.bulk[i]}
                 : std::vector<double>{d.nodes[i][0], u.bulk[i]});
  CsvWriter wg(bnd_path, {"s", "u_gamma"});
  for (int s = 0; s < d.num_boundary(); ++s) wg.row({d.arc[s], u.bnd[s]});
}

inline std::string snapshot_name(int step) {
  std::ostringstream os;
  os << "snap_" << std::setw(6) << std::setfill('0') << step;
  return os.str();
}

inline void write_eps_table(const fs::path& path, const EpsSweep& sw) {
  CsvWriter w(path, {"j", "eps", "eps_next", "d"});
  for (std::size_t j = 0; j < sw.d.size(); ++j)
    w.row({static_cast<double>(j), sw.eps[j], sw.eps[j + 1], sw.d[j]});
}

inline void write_bounds(const fs::path& path, const std::vector<BoundMonitor>& rows) {
  std::vector<std::string> header{"eps"};
  for (const auto& n : BoundMonitor::column_names()) header.push_back(n);
  CsvWriter w(path, header);
  for (const auto& r : rows) {
    std::vector<double> v{r.eps};
    for (double c : r.columns()) v.push_back(c);
    w.row(v);
  }
}

inline void write_cd_report(const fs::path& path, const DependenceReport& rep) {
  CsvWriter w(path, {"t", "lhs", "rhs", "ratio", "ratio_discrete"});
  for (const auto& s : rep.steps) w.row({s.t, s.lhs, s.rhs, s.ratio, s.ratio_discrete});
}

inline void write_density(const fs::path& path, const DensityRun& run) {
  CsvWriter w(path, {"n", "err_bulk", "err_bnd", "energy_lhs", "energy_bound", "norm_sq", "norm_sq_data"});
  for (const auto& e : run.entries)
    w.row({static_cast<double>(e.n), e.err_bulk, e.err_bnd, e.energy_lhs, e.energy_bound, e.norm_sq, e.norm_sq_data});
}

}  // namespace acdyn::io
