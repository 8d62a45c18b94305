// JSON serialization for channel specs and reports.
//
// Channel files store probabilities as decimal strings with 17 significant
// digits, which round-trips IEEE doubles bit-exactly; readers also accept
// plain JSON numbers. Report values are quantized to 12 significant digits.
#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "relaycap/capacity.hpp"
#include "relaycap/channel.hpp"
#include "relaycap/codec.hpp"
#include "relaycap/gaussian.hpp"
#include "relaycap/pmf.hpp"

namespace relaycap {

namespace detail {

inline std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double quantize12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::strtod(buf, nullptr);
}

inline double prob_from_json(const nlohmann::json& v) {
  if (v.is_string()) return std::strtod(v.get_ref<const std::string&>().c_str(), nullptr);
  if (v.is_number()) return v.get<double>();
  throw std::invalid_argument("probability entries must be numbers or decimal strings");
}

inline nlohmann::json num12(double v) { return nlohmann::json(quantize12(v)); }

}  // namespace detail

inline nlohmann::json channel_to_json(const DiscreteRelayChannel& ch) {
  nlohmann::json t = nlohmann::json::array();
  for (std::size_t x = 0; x < ch.size_x(); ++x) {
    nlohmann::json plane = nlohmann::json::array();
    for (std::size_t y = 0; y < ch.size_y(); ++y) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t y1 = 0; y1 < ch.size_y1(); ++y1)
        row.push_back(detail::format17(ch.prob(x, y, y1)));
      plane.push_back(std::move(row));
    }
    t.push_back(std::move(plane));
  }
  return nlohmann::json{{"schema", "relaycap.channel.v1"},
                        {"sizeX", ch.size_x()},
                        {"sizeY", ch.size_y()},
                        {"sizeY1", ch.size_y1()},
                        {"transition", std::move(t)}};
}

inline DiscreteRelayChannel channel_from_json(const nlohmann::json& j) {
  const std::size_t nx = j.at("sizeX").get<std::size_t>();
  const std::size_t ny = j.at("sizeY").get<std::size_t>();
  const std::size_t ny1 = j.at("sizeY1").get<std::size_t>();
  const auto& t = j.at("transition");
  if (!t.is_array() || t.size() != nx)
    throw std::invalid_argument("channel: transition must be a sizeX-long array");
  std::vector<double> flat;
  flat.reserve(nx * ny * ny1);
  for (std::size_t x = 0; x < nx; ++x) {
    if (!t[x].is_array() || t[x].size() != ny)
      throw std::invalid_argument("channel: transition[x] must be a sizeY-long array");
    for (std::size_t y = 0; y < ny; ++y) {
      if (!t[x][y].is_array() || t[x][y].size() != ny1)
        throw std::invalid_argument("channel: transition[x][y] must be a sizeY1-long array");
      for (std::size_t y1 = 0; y1 < ny1; ++y1)
        flat.push_back(detail::prob_from_json(t[x][y][y1]));
    }
  }
  return DiscreteRelayChannel(nx, ny, ny1, std::move(flat));
}

inline GaussianRelaySpec gaussian_from_json(const nlohmann::json& j) {
  return GaussianRelaySpec(detail::prob_from_json(j.at("P")), detail::prob_from_json(j.at("N")),
                           detail::prob_from_json(j.at("rho")));
}

inline nlohmann::json state_channel_to_json(const StateChannel& sc) {
  nlohmann::json ps = nlohmann::json::array();
  for (std::size_t s = 0; s < sc.size_s(); ++s) ps.push_back(detail::format17(sc.state[s]));
  nlohmann::json t = nlohmann::json::array();
  for (std::size_t x = 0; x < sc.size_x; ++x) {
    nlohmann::json plane = nlohmann::json::array();
    for (std::size_t s = 0; s < sc.size_s(); ++s) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t y = 0; y < sc.size_y; ++y)
        row.push_back(detail::format17(sc.prob_y(x, s, y)));
      plane.push_back(std::move(row));
    }
    t.push_back(std::move(plane));
  }
  return nlohmann::json{{"schema", "relaycap.state-channel.v1"},
                        {"sizeX", sc.size_x},
                        {"sizeS", sc.size_s()},
                        {"sizeY", sc.size_y},
                        {"state", std::move(ps)},
                        {"transition", std::move(t)}};
}

// State-channel spec: p(s) plus p(y|x,s) with transition[x][s][y].
inline StateChannel state_channel_from_json(const nlohmann::json& j) {
  const std::size_t nx = j.at("sizeX").get<std::size_t>();
  const std::size_t ns = j.at("sizeS").get<std::size_t>();
  const std::size_t ny = j.at("sizeY").get<std::size_t>();
  std::vector<double> ps;
  for (const auto& v : j.at("state")) ps.push_back(detail::prob_from_json(v));
  if (ps.size() != ns) throw std::invalid_argument("state-channel: state pmf length mismatch");
  const auto& t = j.at("transition");
  std::vector<double> flat;
  flat.reserve(nx * ns * ny);
  if (!t.is_array() || t.size() != nx)
    throw std::invalid_argument("state-channel: transition must be a sizeX-long array");
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t s = 0; s < ns; ++s)
      for (std::size_t y = 0; y < ny; ++y)
        flat.push_back(detail::prob_from_json(t.at(x).at(s).at(y)));
  return StateChannel(Pmf(std::move(ps)), nx, ny, std::move(flat));
}

class FileError : public std::runtime_error {
 public:
  explicit FileError(const std::string& msg) : std::runtime_error(msg) {}
};

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path);
  return nlohmann::json::parse(in);  // parse_error carries byte position
}

inline DiscreteRelayChannel load_channel(const std::string& path) {
  return channel_from_json(load_json_file(path));
}

inline void save_channel(const DiscreteRelayChannel& ch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << channel_to_json(ch).dump(2) << '\n';
}

inline nlohmann::json pmf_to_json(const Pmf& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < p.size(); ++i) arr.push_back(detail::num12(p[i]));
  return arr;
}

inline nlohmann::json test_channel_to_json(const TestChannel& tc) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < tc.size_y1(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < tc.size_y1hat(); ++c) row.push_back(detail::num12(tc.prob(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json rate_point_to_json(const RatePoint& pt) {
  nlohmann::json j{{"schema", "relaycap.ratepoint.v1"},
                   {"r0", detail::num12(pt.r0)},
                   {"rate", detail::num12(pt.rate)},
                   {"argmaxInput", pmf_to_json(pt.argmax_input)},
                   {"branches",
                    {{"directPlusLink", detail::num12(pt.term_direct_plus_link)},
                     {"relayJoint", detail::num12(pt.term_relay_joint)},
                     {"active", to_string(pt.active_branch)}}},
                   {"converged", pt.converged}};
  j["witness"] = pt.witness ? test_channel_to_json(*pt.witness) : nlohmann::json();
  j["linkCost"] = pt.link_cost ? detail::num12(*pt.link_cost) : nlohmann::json();
  j["optimalityGap"] = pt.optimality_gap ? detail::num12(*pt.optimality_gap) : nlohmann::json();
  return j;
}

inline nlohmann::json sim_report_to_json(const SimReport& rep) {
  return nlohmann::json{
      {"schema", "relaycap.simreport.v1"},
      {"params",
       {{"n", rep.n},
        {"rate", detail::num12(rep.rate)},
        {"rateEffective", detail::num12(rep.rate_effective)},
        {"r0", detail::num12(rep.r0)},
        {"kBits", rep.k_bits},
        {"binBits", rep.bin_bits},
        {"numWords", rep.num_words},
        {"eps", detail::num12(rep.eps)},
        {"trials", rep.trials},
        {"masterSeed", rep.master_seed},
        {"fixedCodebook", rep.fixed_codebook},
        {"px", pmf_to_json(rep.px)}}},
      {"counts",
       {{"errA", rep.counts.err_a},
        {"errB", rep.counts.err_b},
        {"errC", rep.counts.err_c},
        {"errNone", rep.counts.err_none},
        {"decodedOk", rep.counts.decoded_ok},
        {"decodedWrong", rep.counts.decoded_wrong},
        {"emptyList", rep.counts.empty_list},
        {"emptyBinMatch", rep.counts.empty_bin_match},
        {"ambiguous", rep.counts.ambiguous}}},
      {"errors", rep.errors},
      {"peHat", detail::num12(rep.pe_hat)},
      {"wilson95", {{"lo", detail::num12(rep.wilson.lo)}, {"hi", detail::num12(rep.wilson.hi)}}}};
}

}  // namespace relaycap
