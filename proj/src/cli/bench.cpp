#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "pltp/cli/commands.hpp"
#include "pltp/client/rpc.hpp"
#include "pltp/reader.hpp"
#include "pltp/writer.hpp"

namespace pltp::cli {

std::string bench_fact_base(std::size_t n) {
  std::ostringstream out;
  std::uint64_t x = 88172645463325252ULL;
  for (std::size_t i = 0; i < n; ++i) {
    // xorshift64: a fixed base for every run.
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    const double lat = 52.0 + static_cast<double>(x % 10000) / 10000.0;
    const double lon = 4.0 + static_cast<double>((x >> 20) % 10000) / 10000.0;
    out << "event(e" << i << ", " << format_float(lat) << ", " << format_float(lon) << ").\n";
  }
  return out.str();
}

namespace {

double cpu_ms() { return 1000.0 * static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

}  // namespace

BenchReport run_bench(client::Session& session, const BenchOptions& options) {
  BenchReport report;
  report.facts = options.facts;
  report.iterations = options.iterations;
  const std::string facts = bench_fact_base(options.facts);
  const Term query = parse_term("event(E, Lat, Lon)");
  std::vector<std::string> reference;
  bool have_reference = false;
  for (std::size_t chunk : options.chunks) {
    BenchRow row;
    row.chunk = chunk;
    for (std::size_t i = 0; i < options.iterations; ++i) {
      client::RpcOptions o;
      o.src_text = facts;
      o.chunk = chunk;
      const auto wall0 = std::chrono::steady_clock::now();
      const double cpu0 = cpu_ms();
      const std::vector<Term> solutions = client::rpc_all(session, query, o);
      row.cpu_ms += cpu_ms() - cpu0;
      row.wall_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - wall0).count();
      std::vector<std::string> texts;
      texts.reserve(solutions.size());
      for (const Term& t : solutions) texts.push_back(write_term(t));
      std::sort(texts.begin(), texts.end());
      if (!have_reference) {
        reference = std::move(texts);
        have_reference = true;
      } else if (texts != reference) {
        report.consistent = false;
      }
      row.solutions = solutions.size();
    }
    if (options.iterations > 0) {
      row.wall_ms /= static_cast<double>(options.iterations);
      row.cpu_ms /= static_cast<double>(options.iterations);
    }
    report.rows.push_back(row);
  }
  return report;
}

json bench_json(const BenchReport& report) {
  json out = json::object();
  out["facts"] = report.facts;
  out["iterations"] = report.iterations;
  out["consistent"] = report.consistent;
  json rows = json::array();
  for (const BenchRow& r : report.rows) {
    json row = json::object();
    row["chunk"] = r.chunk;
    row["wall_ms"] = r.wall_ms;
    row["cpu_ms"] = r.cpu_ms;
    row["solutions"] = r.solutions;
    rows.push_back(std::move(row));
  }
  out["rows"] = std::move(rows);
  return out;
}

std::string bench_table(const BenchReport& report) {
  std::ostringstream out;
  out << report.facts << " facts, " << report.iterations << " iteration(s) per chunk size\n";
  out << std::setw(8) << "chunk" << std::setw(12) << "wall ms" << std::setw(12) << "cpu ms"
      << std::setw(12) << "solutions" << '\n';
  out << std::fixed << std::setprecision(1);
  for (const BenchRow& r : report.rows) {
    out << std::setw(8) << r.chunk << std::setw(12) << r.wall_ms << std::setw(12) << r.cpu_ms
        << std::setw(12) << r.solutions << '\n';
  }
  if (!report.consistent) out << "warning: solution sets differ between runs\n";
  return out.str();
}

}  // namespace pltp::cli
