#include "smectic/field_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace smectic {

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string field_bytes(const ScalarField& f) {
  std::string out(f.values.size() * sizeof(double), '\0');
  for (Eigen::Index n = 0; n < f.values.size(); ++n) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(f.values[n]);
    for (int b = 0; b < 8; ++b)
      out[n * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
  }
  return out;
}

Json field_sidecar(const ScalarField& f, const std::string& name) {
  Json j;
  j["nx"] = f.grid.nx();
  j["ny"] = f.grid.ny();
  j["nz"] = f.grid.nz();
  j["box"] = to_json(f.grid.box());
  j["name"] = name;
  return j;
}

ScalarField read_field_dump(const std::filesystem::path& sidecar) {
  std::ifstream meta(sidecar);
  if (!meta) throw std::runtime_error("cannot open field sidecar " + sidecar.string());
  const Json j = Json::parse(meta);
  const auto lo = j.at("box").at("lo").get<std::array<double, 3>>();
  const auto hi = j.at("box").at("hi").get<std::array<double, 3>>();
  const Grid3 grid(j.at("nx").get<int>(), j.at("ny").get<int>(), j.at("nz").get<int>(),
                   Box{{lo[0], lo[1], lo[2]}, {hi[0], hi[1], hi[2]}});
  std::filesystem::path raw = sidecar;
  raw.replace_extension(".f64");
  std::ifstream in(raw, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open field dump " + raw.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != grid.size() * 8)
    throw std::runtime_error("field dump " + raw.string() + " has " +
                             std::to_string(bytes.size()) + " bytes, expected " +
                             std::to_string(grid.size() * 8));
  Eigen::ArrayXd v(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[n * 8 + b])) << (8 * b);
    v[n] = std::bit_cast<double>(bits);
  }
  return {grid, std::move(v)};
}

std::string field_csv(const ScalarField& f) {
  std::string out = "x,y,z,value\n";
  for (std::size_t n = 0; n < f.grid.size(); ++n) {
    const Eigen::Vector3d x = f.grid.coord(n);
    out += format_number(x.x()) + ',' + format_number(x.y()) + ',' + format_number(x.z()) + ',' +
           format_number(f.values[n]) + '\n';
  }
  return out;
}

std::string profile_csv(const ProfileSolution& sol) {
  std::vector<std::vector<double>> rows;
  rows.reserve(sol.ts.size());
  for (std::size_t i = 0; i < sol.ts.size(); ++i) rows.push_back({sol.ts[i], sol.gs[i], sol.dgs[i]});
  return table_csv({"t", "g", "g_prime"}, rows);
}

std::string trajectory_csv(const std::vector<TrajectoryPoint>& traj) {
  std::string out = "iter,energy,grad_norm,step\n";
  for (const auto& p : traj)
    out += std::to_string(p.iter) + ',' + format_number(p.energy) + ',' +
           format_number(p.grad_norm) + ',' + format_number(p.step) + '\n';
  return out;
}

std::string table_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::logic_error("table_csv: row width does not match header");
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + format_number(row[c]);
    out += '\n';
  }
  return out;
}

Json to_json(const Box& b) {
  return Json{{"lo", {b.lo.x(), b.lo.y(), b.lo.z()}}, {"hi", {b.hi.x(), b.hi.y(), b.hi.z()}}};
}

Json to_json(const Window& w) {
  return Json{{"x", w.fraction[0]}, {"y", w.fraction[1]}, {"z", w.fraction[2]}};
}

Json to_json(const EnergyBreakdown& e) {
  return Json{{"epsilon", e.epsilon},
              {"compression", e.compression},
              {"bending", e.bending},
              {"total", e.total},
              {"curvature_integral", e.curvature_integral}};
}

Json to_json(const BpsDecomposition& d) {
  return Json{{"sign", static_cast<int>(d.sign)},
              {"square_term", d.square_term},
              {"curvature_term", d.curvature_term},
              {"flux_term", d.flux_term},
              {"reconstructed_total", d.reconstructed_total}};
}

Json to_json(const JumpStates& j) {
  auto vec = [](const Eigen::Vector3d& v) { return Json{v.x(), v.y(), v.z()}; };
  return Json{{"m_plus", vec(j.m_plus())}, {"m_minus", vec(j.m_minus())}, {"nu", vec(j.nu())}};
}

Json to_json(const CompactnessReport& c) {
  Json lp = Json::array();
  for (std::size_t i = 0; i < c.exponents.size(); ++i)
    lp.push_back(Json{{"p", c.exponents[i]}, {"norm", c.grad_lp[i]}});
  return Json{{"grad_lp", lp},
              {"curl_x_l2", c.curl_x_l2},
              {"curl_y_l2", c.curl_y_l2},
              {"div_b_l1", c.div_b_l1},
              {"compression_l2", c.compression_l2},
              {"laplacian_sign_fraction", c.laplacian_sign_fraction}};
}

Json to_json(const MinimizeReport& r) {
  return Json{{"initial_energy", to_json(r.initial)},
              {"final_energy", to_json(r.final_energy)},
              {"window", to_json(r.final_energy.region)},
              {"equipartition_gap", r.equipartition_gap},
              {"jump_area", r.jump_area},
              {"lower_bound", r.lower_bound},
              {"upper_bound", r.upper_bound},
              {"lower_bound_slack", r.lower_bound_slack},
              {"iterations", r.iterations},
              {"termination", to_string(r.termination)}};
}

}  // namespace smectic
