#include "recembed/point_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "recembed/error.hpp"

namespace recembed {

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  return std::filesystem::path(csv_path.string() + ".json");
}

std::string format_sig9(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

std::string format_exact(double value) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out) throw DomainError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_point_set(const std::filesystem::path& csv_path, const PointSet& s,
                     const nlohmann::json& extra) {
  std::string csv;
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto x = s.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j) csv += ',';
      csv += format_exact(x[j]);
    }
    csv += '\n';
  }
  nlohmann::json meta = extra;
  meta["n"] = s.size();
  meta["d"] = s.dim();
  if (s.norm().is_infinite()) {
    meta["p"] = "inf";
  } else {
    meta["p"] = s.norm().value();
  }
  meta["ids"] = s.ids();
  write_file_atomic(csv_path, csv);
  write_file_atomic(sidecar_path(csv_path), meta.dump(2) + "\n");
}

namespace {

NormExponent norm_from_json(const nlohmann::json& j) {
  if (j.is_string()) return NormExponent::parse(j.get<std::string>());
  if (j.is_number()) return NormExponent(j.get<double>());
  throw DomainError("sidecar field 'p' must be a number or \"inf\"");
}

}  // namespace

PointSet read_point_set(const std::filesystem::path& csv_path) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(sidecar_path(csv_path)));
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("bad sidecar for " + csv_path.string() + ": " + e.what());
  }
  for (const char* key : {"n", "d", "p"}) {
    if (!meta.contains(key)) throw DomainError(std::string("sidecar is missing '") + key + "'");
  }
  const auto n = meta["n"].get<std::size_t>();
  const auto d = meta["d"].get<std::size_t>();
  const NormExponent p = norm_from_json(meta["p"]);
  std::vector<PointId> ids;
  if (meta.contains("ids")) ids = meta["ids"].get<std::vector<PointId>>();

  const std::string text = read_file(csv_path);
  std::vector<double> data;
  data.reserve(n * d);
  std::size_t rows = 0;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::size_t cols = 0;
    const char* it = line.data();
    const char* end = line.data() + line.size();
    while (it < end) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(it, end, v);
      if (ec != std::errc()) {
        throw DomainError("bad number on row " + std::to_string(rows + 1) + " of " +
                          csv_path.string());
      }
      data.push_back(v);
      ++cols;
      it = ptr;
      if (it < end && *it == ',') ++it;
      while (it < end && (*it == ' ' || *it == '\r')) ++it;
    }
    if (cols != d) {
      throw DomainError("row " + std::to_string(rows + 1) + " has " + std::to_string(cols) +
                        " columns, sidecar says d = " + std::to_string(d));
    }
    ++rows;
  }
  if (rows != n) {
    throw DomainError(csv_path.string() + " has " + std::to_string(rows) +
                      " rows, sidecar says n = " + std::to_string(n));
  }
  return PointSet(std::move(data), d, p, std::move(ids));
}

}  // namespace recembed
