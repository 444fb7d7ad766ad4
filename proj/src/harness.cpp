#include "peeroc/harness.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

namespace peeroc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split(const std::string& text, char sep)
{
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

bool looks_like_path(const std::string& s)
{
  return s.find('/') != std::string::npos || (s.size() > 5 && s.compare(s.size() - 5, 5, ".json") == 0);
}

std::string number(double x)
{
  if (std::isnan(x)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

nlohmann::ordered_json json_number(double x)
{
  return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr);
}

double order(double coarse, double fine)
{
  if (!(coarse > 0.0) || !(fine > 0.0) || !std::isfinite(coarse) || !std::isfinite(fine)) return kNaN;
  return std::log2(coarse / fine);
}

ConvergenceRow solve_cell(const BvpProblem& prob, const PeerTriplet& method, int n_plus_one, const NewtonOptions& opts,
                          const ReferenceSource& ref)
{
  ConvergenceRow row;
  row.n_plus_one = n_plus_one;
  const KktSolution sol = solve_kkt(method, prob, n_plus_one - 1, opts);
  row.iterations = sol.iterations;
  row.residual = sol.residual_norm;
  row.converged = sol.converged;
  if (!sol.converged) {
    row.state_error = row.adjoint_error = row.cost = kNaN;
    return row;
  }
  const SolutionErrors err = extract_errors(sol, ref.sample(n_plus_one));
  row.state_error = err.state;
  row.adjoint_error = err.adjoint;
  row.cost = prob.running_cost && prob.terminal_cost ? evaluate_cost(prob, discrete_trajectory(sol, prob)) : kNaN;
  return row;
}

}  // namespace

std::vector<PeerTriplet> select_methods(const std::string& selector)
{
  std::vector<PeerTriplet> out;
  if (selector == "all") {
    for (const auto& name : builtin_triplet_names()) out.push_back(load_triplet(name));
    return out;
  }
  for (const auto& item : split(selector, ',')) {
    if (looks_like_path(item)) {
      std::ifstream in(item);
      if (!in) throw UnknownMethodError(item);
      std::ostringstream text;
      text << in.rdbuf();
      out.push_back(parse_triplet(text.str()));
    } else {
      out.push_back(load_triplet(item));
    }
  }
  if (out.empty()) throw UnknownMethodError(selector);
  return out;
}

double ConvergenceTable::state_order(std::size_t i) const
{
  if (i == 0 || i >= rows.size()) return kNaN;
  return order(rows[i - 1].state_error, rows[i].state_error);
}

double ConvergenceTable::adjoint_order(std::size_t i) const
{
  if (i == 0 || i >= rows.size()) return kNaN;
  return order(rows[i - 1].adjoint_error, rows[i].adjoint_error);
}

void check_step_list(const std::vector<int>& steps)
{
  if (steps.empty()) throw std::invalid_argument("step list is empty");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i] < 4) throw std::invalid_argument("step counts must be at least 4");
    if (i > 0 && steps[i] != 2 * steps[i - 1]) throw std::invalid_argument("each step count must double the previous");
  }
}

ReferenceSource::ReferenceSource(const BvpProblem& prob, const ShootingOptions& opts) : prob_(&prob)
{
  if (!prob.has_exact_solution()) shot_ = shoot(prob, opts);
}

ReferenceTrajectory ReferenceSource::sample(int n_plus_one) const
{
  return shot_ ? sample_reference(*prob_, *shot_, n_plus_one) : exact_reference(*prob_, n_plus_one);
}

int sweep_threads()
{
  const char* env = std::getenv("PEEROC_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || n < 1) return 1;
  return static_cast<int>(std::min<long>(n, 256));
}

std::vector<ConvergenceTable> convergence_sweep(const BvpProblem& prob, const std::vector<PeerTriplet>& methods,
                                                const std::vector<int>& steps, const NewtonOptions& opts,
                                                const ReferenceSource& ref, int threads)
{
  check_step_list(steps);
  std::vector<ConvergenceTable> tables(methods.size());
  for (std::size_t i = 0; i < methods.size(); ++i) {
    tables[i].method = methods[i].name;
    tables[i].problem = prob.name;
    tables[i].horizon = prob.T - prob.t0;
    tables[i].rows.resize(steps.size());
  }
  const std::size_t cells = methods.size() * steps.size();
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(cells);
  auto work = [&] {
    for (std::size_t k = next++; k < cells; k = next++) {
      const std::size_t mi = k / steps.size();
      const std::size_t si = k % steps.size();
      try {
        tables[mi].rows[si] = solve_cell(prob, methods[mi], steps[si], opts, ref);
      } catch (...) {
        failures[k] = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(cells)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  return tables;
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceTable>& tables)
{
  os << "problem,method,n_plus_one,h,state_error,adjoint_error,state_order,adjoint_order,iterations,residual,"
        "converged,cost\n";
  for (const auto& t : tables)
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto& r = t.rows[i];
      os << t.problem << ',' << t.method << ',' << r.n_plus_one << ',' << number(t.horizon / r.n_plus_one) << ','
         << number(r.state_error) << ',' << number(r.adjoint_error) << ',' << number(t.state_order(i)) << ','
         << number(t.adjoint_order(i)) << ',' << r.iterations << ',' << number(r.residual) << ','
         << (r.converged ? 1 : 0) << ',' << number(r.cost) << '\n';
    }
}

void write_convergence_json(std::ostream& os, const std::vector<ConvergenceTable>& tables)
{
  auto doc = nlohmann::ordered_json::array();
  for (const auto& t : tables) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto& r = t.rows[i];
      rows.push_back({{"n_plus_one", r.n_plus_one},
                      {"state_error", json_number(r.state_error)},
                      {"adjoint_error", json_number(r.adjoint_error)},
                      {"state_order", json_number(t.state_order(i))},
                      {"adjoint_order", json_number(t.adjoint_order(i))},
                      {"iterations", r.iterations},
                      {"residual", json_number(r.residual)},
                      {"converged", r.converged},
                      {"cost", json_number(r.cost)}});
    }
    doc.push_back({{"problem", t.problem}, {"method", t.method}, {"rows", rows}});
  }
  os << doc.dump(2) << '\n';
}

void write_convergence_svg(std::ostream& os, const std::vector<ConvergenceTable>& tables, const std::string& title)
{
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};
  constexpr double width = 720, height = 480, left = 70, right = 170, top = 40, bottom = 50;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& t : tables)
    for (const auto& r : t.rows) {
      xmin = std::min(xmin, std::log2(r.n_plus_one));
      xmax = std::max(xmax, std::log2(r.n_plus_one));
      for (double e : {r.state_error, r.adjoint_error})
        if (e > 0.0 && std::isfinite(e)) {
          ymin = std::min(ymin, std::log10(e));
          ymax = std::max(ymax, std::log10(e));
        }
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1;
  if (!std::isfinite(ymin)) ymin = -1, ymax = 0;
  ymin = std::floor(ymin);
  ymax = std::ceil(ymax);
  xmin = std::floor(xmin);
  xmax = std::ceil(xmax);
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };
  auto escape = [](const std::string& s) {
    std::string out;
    for (char ch : s) {
      if (ch == '&') out += "&amp;";
      else if (ch == '<') out += "&lt;";
      else if (ch == '>') out += "&gt;";
      else if (ch == '"') out += "&quot;";
      else out += ch;
    }
    return out;
  };

  os << std::fixed << std::setprecision(2);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double x = xmin; x <= xmax + 1e-9; x += 1.0) {
    os << "<line x1=\"" << px(x) << "\" y1=\"" << top << "\" x2=\"" << px(x) << "\" y2=\"" << top + ph
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << px(x) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">" << std::setprecision(0)
       << x << std::setprecision(2) << "</text>\n";
  }
  for (double y = ymin; y <= ymax + 1e-9; y += 1.0) {
    os << "<line x1=\"" << left << "\" y1=\"" << py(y) << "\" x2=\"" << left + pw << "\" y2=\"" << py(y)
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << std::setprecision(0) << y
       << std::setprecision(2) << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">log2(N+1)</text>\n";
  os << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << top + ph / 2
     << ")\">log10(error)</text>\n";

  for (std::size_t k = 0; k < tables.size(); ++k) {
    const auto& t = tables[k];
    const char* colour = palette[k % (sizeof(palette) / sizeof(palette[0]))];
    for (int which = 0; which < 2; ++which) {
      std::vector<std::vector<std::pair<double, double>>> pieces(1);
      for (const auto& r : t.rows) {
        const double e = which == 0 ? r.state_error : r.adjoint_error;
        if (e > 0.0 && std::isfinite(e))
          pieces.back().emplace_back(px(std::log2(r.n_plus_one)), py(std::log10(e)));
        else if (!pieces.back().empty())
          pieces.emplace_back();
      }
      for (const auto& piece : pieces) {
        if (piece.empty()) continue;
        os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\""
           << (which == 1 ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
        for (std::size_t i = 0; i < piece.size(); ++i)
          os << (i ? " " : "") << piece[i].first << ',' << piece[i].second;
        os << "\"/>\n";
        for (const auto& [x, y] : piece)
          os << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"2.5\" fill=\"" << colour << "\"/>\n";
      }
    }
    const double ly = top + 14 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 36 << "\" y2=\"" << ly
       << "\" stroke=\"" << colour << "\" stroke-width=\"1.5\"/>\n";
    os << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\">" << escape(t.method) << "</text>\n";
  }
  const double ly = top + 14 + 18.0 * static_cast<double>(tables.size()) + 8;
  os << "<text x=\"" << left + pw + 12 << "\" y=\"" << ly << "\">solid: state</text>\n";
  os << "<text x=\"" << left + pw + 12 << "\" y=\"" << ly + 16 << "\">dashed: adjoint</text>\n";
  os << "</svg>\n";
  os.unsetf(std::ios::floatfield);
}

void write_manifest_json(std::ostream& os, const RunManifest& m)
{
  nlohmann::ordered_json doc;
  doc["argv"] = m.argv;
  doc["command"] = m.command;
  doc["methods"] = m.methods;
  doc["problem"] = m.problem;
  doc["steps"] = m.steps;
  doc["tolerance"] = m.tolerance;
  doc["initial_guess"] = m.initial_guess;
  doc["jacobian"] = m.jacobian;
  doc["outputs"] = m.outputs;
  doc["determinism"] = "no random numbers; output is independent of PEEROC_THREADS";
  os << doc.dump(2) << '\n';
}

}  // namespace peeroc
