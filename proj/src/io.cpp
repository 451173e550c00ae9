#include "twf/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace twf::io {

using nlohmann::json;

namespace {

void append_f64_le(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double read_f64_le(const char* ptr) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(ptr[i]))
            << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::int64_t ulp_distance(double a, double b) {
  if (a == b) return 0;
  auto ordered = [](double x) {
    std::int64_t i;
    std::memcpy(&i, &x, 8);
    return i < 0 ? std::numeric_limits<std::int64_t>::min() - i : i;
  };
  return std::abs(ordered(a) - ordered(b));
}

json seed_json(const SeedRecord& seed) {
  return json{{"master", seed.master}, {"path", seed.path}};
}

SeedRecord seed_from_json(const json& j) {
  SeedRecord seed;
  seed.master = j.at("master").get<std::uint64_t>();
  seed.path = j.at("path").get<std::vector<std::uint64_t>>();
  return seed;
}

std::uint64_t derived_seed_key(const SeedRecord& seed) {
  RngStream stream = RngStream::from_path(seed.master, {});
  for (std::uint64_t idx : seed.path) stream = stream.substream(idx);
  return stream.key();
}

std::vector<int> indices_to_one_based(const std::vector<int>& v) {
  std::vector<int> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] + 1;
  return out;
}

std::vector<int> indices_from_one_based(const std::vector<int>& v) {
  std::vector<int> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - 1;
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_instance(const ProblemInstance& instance, const std::string& path) {
  const SparseSignal& signal = instance.signal();
  json header{
      {"format", "twf-instance"},
      {"version", kToolVersion},
      {"m", instance.m()},
      {"p", instance.p()},
      {"noise",
       {{"family", noise_family_name(instance.noise_spec().family)},
        {"scale", instance.noise_spec().scale}}},
      {"seed", seed_json(instance.seed())},
      {"y", std::vector<double>(instance.measurements().begin(),
                                instance.measurements().end())},
      {"noise_values",
       std::vector<double>(instance.noise().begin(), instance.noise().end())},
      {"signal",
       {{"p", signal.p()},
        {"support", indices_to_one_based(signal.support())},
        {"values", signal.values()}}},
      {"design", {{"layout", "row-major"}, {"dtype", "float64-le"}}},
  };

  std::string out = header.dump();
  out.push_back('\n');
  const DesignMatrix& A = instance.design();
  out.reserve(out.size() + static_cast<std::size_t>(A.size()) * 8);
  if constexpr (std::endian::native == std::endian::little) {
    out.append(reinterpret_cast<const char*>(A.data()),
               static_cast<std::size_t>(A.size()) * 8);
  } else {
    for (Eigen::Index i = 0; i < A.size(); ++i)
      append_f64_le(out, A.data()[i]);
  }
  write_file(path, out);
}

ProblemInstance load_instance(const std::string& path) {
  std::string raw = read_file(path);
  const std::size_t newline = raw.find('\n');
  if (newline == std::string::npos)
    throw std::runtime_error("instance file has no header line: " + path);
  json header = json::parse(raw.substr(0, newline));
  if (header.value("format", "") != "twf-instance")
    throw std::runtime_error("not a twf-instance file: " + path);

  const int m = header.at("m").get<int>();
  const int p = header.at("p").get<int>();
  const std::size_t blob_offset = newline + 1;
  const std::size_t expect = static_cast<std::size_t>(m) * p * 8;
  if (raw.size() - blob_offset != expect)
    throw std::runtime_error("instance design blob has wrong size: " + path);

  DesignMatrix design(m, p);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(design.data(), raw.data() + blob_offset, expect);
  } else {
    for (Eigen::Index i = 0; i < design.size(); ++i)
      design.data()[i] = read_f64_le(raw.data() + blob_offset + 8 * i);
  }

  const json& sig = header.at("signal");
  SparseSignal signal(sig.at("p").get<int>(),
                      indices_from_one_based(sig.at("support").get<std::vector<int>>()),
                      sig.at("values").get<std::vector<double>>());

  NoiseSpec noise;
  noise.family = noise_family_from_name(header.at("noise").at("family").get<std::string>());
  noise.scale = header.at("noise").at("scale").get<double>();

  auto eps_vals = header.at("noise_values").get<std::vector<double>>();
  if (static_cast<int>(eps_vals.size()) != m)
    throw std::runtime_error("instance noise length mismatch: " + path);
  Vector eps = Eigen::Map<Vector>(eps_vals.data(), m);

  ProblemInstance instance(std::move(design), std::move(signal), std::move(eps),
                           noise, seed_from_json(header.at("seed")));

  // Stored measurements must agree with the reassembled ones.
  auto y_stored = header.at("y").get<std::vector<double>>();
  if (static_cast<int>(y_stored.size()) != m)
    throw std::runtime_error("instance measurement length mismatch: " + path);
  for (int j = 0; j < m; ++j)
    if (ulp_distance(y_stored[j], instance.measurements()[j]) > 4)
      throw std::runtime_error("instance measurements are inconsistent: " + path);
  return instance;
}

json trial_params_json(const TrialParams& params) {
  return json{{"p", params.p},
              {"m", params.m},
              {"k", params.k},
              {"nsr", params.nsr},
              {"noise_family", noise_family_name(params.family)},
              {"alpha", params.alpha},
              {"beta", params.beta},
              {"mu", params.mu},
              {"iterations", params.iterations},
              {"operator", threshold_kind_name(params.operator_kind)},
              {"eig_tol", params.eig_tol},
              {"eig_max_iter", params.eig_max_iter}};
}

json init_result_json(const InitResult& init) {
  return json{{"phi_sq", init.phi_sq},
              {"selected", indices_to_one_based(init.selected)},
              {"eigen_iterations", init.eigen_iterations},
              {"eigen_residual", init.eigen_residual},
              {"fallback_used", init.fallback_used},
              {"x0", std::vector<double>(init.x0.begin(), init.x0.end())}};
}

json trace_json(const TwfTrace& trace) {
  json records = json::array();
  for (const auto& r : trace.records)
    records.push_back(json{{"iter", r.iter},
                           {"risk", r.risk},
                           {"tau", r.tau},
                           {"step_norm", r.step_norm},
                           {"support_size", r.support_size}});
  return json{{"final", std::vector<double>(trace.final.begin(), trace.final.end())},
              {"records", records}};
}

json sweep_result_json(const SweepResult& result) {
  json points = json::array();
  for (const auto& point : result.points) {
    json errors = json::array();
    json init_errors = json::array();
    json fallbacks = json::array();
    json failures = json::array();
    json seeds = json::array();
    for (const auto& trial : point.trials) {
      if (trial.failed) {
        errors.push_back(nullptr);
        init_errors.push_back(nullptr);
        failures.push_back(trial.failure);
      } else {
        errors.push_back(trial.error);
        init_errors.push_back(trial.init_error);
        failures.push_back(nullptr);
      }
      fallbacks.push_back(trial.fallback_used);
      seeds.push_back(seed_json(trial.seed));
    }
    points.push_back(json{{"axis_value", point.axis_value},
                          {"mean_error", point.mean_error},
                          {"failures", point.failures},
                          {"valid", point.valid},
                          {"errors", errors},
                          {"init_errors", init_errors},
                          {"failure_reasons", failures},
                          {"fallbacks", fallbacks},
                          {"seeds", seeds}});
  }
  const SweepSpec& spec = result.spec;
  return json{{"kind", "twf-sweep"},
              {"version", kToolVersion},
              {"spec",
               {{"axis", spec.axis},
                {"grid", spec.grid},
                {"trials", spec.trials},
                {"master_seed", spec.master_seed},
                {"fixed", trial_params_json(spec.fixed)}}},
              {"points", points}};
}

json oracle_report_json(const OracleReport& report) {
  json checks = json::array();
  for (const auto& check : report.checks)
    checks.push_back(json{{"name", check.name},
                          {"pass", check.pass},
                          {"measured", check.measured},
                          {"bound", check.bound},
                          {"detail", check.detail}});
  return json{{"kind", "twf-oracle-report"},
              {"version", kToolVersion},
              {"all_pass", report.all_pass},
              {"checks", checks}};
}

json rate_report_json(const RateReport& report) {
  json points = json::array();
  for (const auto& point : report.points)
    points.push_back(json{{"m", point.m},
                          {"mean_error", point.mean_error},
                          {"error_sqrt_m", point.error_sqrt_m}});
  return json{{"kind", "twf-rate-report"},
              {"version", kToolVersion},
              {"noiseless", report.noiseless},
              {"rate_consistent", report.rate_consistent},
              {"note", report.note},
              {"points", points}};
}

std::string trace_csv(const TwfTrace& trace) {
  std::string out = "iter,risk,tau,step_norm,support_size\n";
  for (const auto& r : trace.records) {
    out += std::to_string(r.iter);
    out += ',';
    out += format_double(r.risk);
    out += ',';
    out += format_double(r.tau);
    out += ',';
    out += format_double(r.step_norm);
    out += ',';
    out += std::to_string(r.support_size);
    out += '\n';
  }
  return out;
}

std::string sweep_trials_csv(const SweepResult& result) {
  std::string out = "axis_value,trial,error,seed,wallclock_ms\n";
  for (const auto& point : result.points) {
    for (std::size_t t = 0; t < point.trials.size(); ++t) {
      const TrialResult& trial = point.trials[t];
      out += format_double(point.axis_value);
      out += ',';
      out += std::to_string(t);
      out += ',';
      out += trial.failed ? "nan" : format_double(trial.error);
      out += ',';
      out += std::to_string(derived_seed_key(trial.seed));
      out += ",0\n";  // reproducible placeholder; live timing in timing csv
    }
  }
  return out;
}

std::string sweep_timing_csv(const SweepResult& result) {
  std::string out = "axis_value,trial,wallclock_ms\n";
  for (const auto& point : result.points) {
    for (std::size_t t = 0; t < point.trials.size(); ++t) {
      out += format_double(point.axis_value);
      out += ',';
      out += std::to_string(t);
      out += ',';
      out += format_double(point.trials[t].wallclock_ms);
      out += '\n';
    }
  }
  return out;
}

namespace {

std::string fmt_coord(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<double>& xs,
                           const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.empty())
    throw std::invalid_argument("line_chart_svg: xs/ys must be nonempty, equal length");

  const double width = 640, height = 440;
  const double left = 80, right = 24, top = 48, bottom = 64;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double x_min = xs[0], x_max = xs[0];
  for (double v : xs) {
    x_min = std::min(x_min, v);
    x_max = std::max(x_max, v);
  }
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -std::numeric_limits<double>::infinity();
  for (double v : ys) {
    if (!std::isfinite(v)) continue;
    y_min = std::min(y_min, v);
    y_max = std::max(y_max, v);
  }
  if (!std::isfinite(y_min)) {
    y_min = 0.0;
    y_max = 1.0;
  }
  if (x_max == x_min) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  if (y_max == y_min) {
    y_min -= 0.5;
    y_max += 0.5;
  }
  const double y_pad = 0.06 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return top + (y_max - y) / (y_max - y_min) * plot_h; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"440\" "
         "viewBox=\"0 0 640 440\">\n";
  svg += "<rect width=\"640\" height=\"440\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"28\" font-family=\"sans-serif\" font-size=\"16\" "
         "text-anchor=\"middle\">" + title + "</text>\n";

  // Axes.
  svg += "<line x1=\"" + fmt_coord(left) + "\" y1=\"" + fmt_coord(top) +
         "\" x2=\"" + fmt_coord(left) + "\" y2=\"" + fmt_coord(top + plot_h) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt_coord(left) + "\" y1=\"" + fmt_coord(top + plot_h) +
         "\" x2=\"" + fmt_coord(left + plot_w) + "\" y2=\"" +
         fmt_coord(top + plot_h) + "\" stroke=\"black\"/>\n";

  const int n_ticks = 5;
  for (int i = 0; i <= n_ticks; ++i) {
    const double xt = x_min + (x_max - x_min) * i / n_ticks;
    const double gx = px(xt);
    svg += "<line x1=\"" + fmt_coord(gx) + "\" y1=\"" + fmt_coord(top + plot_h) +
           "\" x2=\"" + fmt_coord(gx) + "\" y2=\"" + fmt_coord(top + plot_h + 6) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt_coord(gx) + "\" y=\"" + fmt_coord(top + plot_h + 22) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
           fmt_tick(xt) + "</text>\n";

    const double yt = y_min + (y_max - y_min) * i / n_ticks;
    const double gy = py(yt);
    svg += "<line x1=\"" + fmt_coord(left - 6) + "\" y1=\"" + fmt_coord(gy) +
           "\" x2=\"" + fmt_coord(left) + "\" y2=\"" + fmt_coord(gy) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt_coord(left - 10) + "\" y=\"" + fmt_coord(gy + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" +
           fmt_tick(yt) + "</text>\n";
  }

  svg += "<text x=\"" + fmt_coord(left + plot_w / 2) + "\" y=\"" +
         fmt_coord(height - 16) +
         "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" +
         x_label + "</text>\n";
  svg += "<text x=\"20\" y=\"" + fmt_coord(top + plot_h / 2) +
         "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 20 " + fmt_coord(top + plot_h / 2) + ")\">" +
         y_label + "</text>\n";

  std::string pts;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(ys[i])) continue;
    if (!pts.empty()) pts += ' ';
    pts += fmt_coord(px(xs[i])) + "," + fmt_coord(py(ys[i]));
  }
  svg += "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\" points=\"" +
         pts + "\"/>\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(ys[i])) continue;
    svg += "<circle cx=\"" + fmt_coord(px(xs[i])) + "\" cy=\"" +
           fmt_coord(py(ys[i])) + "\" r=\"3\" fill=\"#c0392b\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace twf::io
