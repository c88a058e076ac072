// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#include "sclora/io.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "sclora/errors.hpp"
#include "sclora/matrix_io.hpp"

namespace sclora {

namespace {

using nlohmann::json;

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

std::uint64_t read_u64(std::istream& in, const std::string& source, std::uint64_t& offset,
                       const char* what) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (in.gcount() != 8) {
    throw FormatError(source, offset + static_cast<std::uint64_t>(in.gcount()),
                      std::string("truncated ") + what);
  }
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  offset += 8;
  return v;
}

template <typename T>
T header_field(const json& header, const char* key, const std::string& source) {
  try {
    return header.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(source, 0, std::string("bad header field '") + key + "': " + e.what());
  }
}

json warnings_to_json(const std::vector<Warning>& warnings) {
  json arr = json::array();
  for (const auto& w : warnings) arr.push_back({{"code", w.code}, {"message", w.message}});
  return arr;
}

bool starts_with_magic(const std::filesystem::path& path, const char (&magic)[4]) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string(), 0, "cannot open file for reading");
  char head[4] = {};
  in.read(head, 4);
  return in.gcount() == 4 && std::memcmp(head, magic, 4) == 0;
}

}  // namespace

std::string format_number(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void save_bundle(const std::filesystem::path& path, const Bundle& bundle) {
  auto out = open_output(path);
  out.write(kBundleMagic, 4);
  out.put(static_cast<char>(kBundleVersion));
  put_u64(out, bundle.header_json.size());
  out.write(bundle.header_json.data(), static_cast<std::streamsize>(bundle.header_json.size()));
  put_u64(out, bundle.records.size());
  for (const auto& m : bundle.records) write_matrix(out, m);
  finish(out, path);
}

Bundle load_bundle(const std::filesystem::path& path) {
  const std::string source = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(source, 0, "cannot open file for reading");

  std::uint64_t offset = 0;
  char magic[5] = {};
  in.read(magic, 5);
  if (in.gcount() != 5) throw FormatError(source, 0, "truncated bundle preamble");
  if (std::memcmp(magic, kBundleMagic, 4) != 0) {
    throw FormatError(source, 0, "bad magic, expected \"SCLB\"");
  }
  if (static_cast<std::uint8_t>(magic[4]) != kBundleVersion) {
    throw FormatError(source, 4, "unsupported bundle version");
  }
  offset = 5;

  const std::uint64_t header_len = read_u64(in, source, offset, "header length");
  if (header_len > (std::uint64_t{1} << 24)) {
    throw FormatError(source, offset - 8, "implausible header length");
  }
  Bundle bundle;
  bundle.header_json.resize(header_len);
  in.read(bundle.header_json.data(), static_cast<std::streamsize>(header_len));
  if (static_cast<std::uint64_t>(in.gcount()) != header_len) {
    throw FormatError(source, offset + static_cast<std::uint64_t>(in.gcount()),
                      "truncated header");
  }
  if (!json::accept(bundle.header_json)) throw FormatError(source, offset, "header is not JSON");
  offset += header_len;

  const std::uint64_t count = read_u64(in, source, offset, "record count");
  MatrixRecordReader reader(in, source, offset);
  for (std::uint64_t i = 0; i < count; ++i) {
    auto m = reader.next();
    if (!m) {
      throw FormatError(source, reader.offset(),
                        "expected " + std::to_string(count) + " records, found " +
                            std::to_string(i));
    }
    bundle.records.push_back(std::move(*m));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(source, reader.offset(), "trailing bytes after last record");
  }
  return bundle;
}

void save_adapter(const std::filesystem::path& path, const AdapterPair& pair,
                  const AdapterMeta& meta) {
  pair.validate();
  json header = {
      {"kind", "adapter"},
      {"scheme", std::string(to_string(pair.scheme))},
      {"r", pair.rank},
      {"d_in", pair.d_in()},
      {"d_out", pair.d_out()},
      {"beta", meta.beta ? json(*meta.beta) : json(nullptr)},
      {"seed", meta.seed ? json(*meta.seed) : json(nullptr)},
      {"warnings", warnings_to_json(meta.warnings)},
  };
  save_bundle(path, Bundle{header.dump(), {pair.a, pair.b, pair.w_res}});
}

AdapterFile load_adapter(const std::filesystem::path& path) {
  const std::string source = path.string();
  Bundle bundle = load_bundle(path);
  const json header = json::parse(bundle.header_json);
  if (header.value("kind", std::string()) != "adapter") {
    throw FormatError(source, 5, "bundle is not an adapter");
  }
  if (bundle.records.size() != 3) {
    throw FormatError(source, 0, "adapter needs 3 records (a, b, w_res)");
  }

  AdapterFile file;
  AdapterPair& p = file.pair;
  try {
    p.scheme = parse_scheme(header_field<std::string>(header, "scheme", source));
  } catch (const InvalidArgument& e) {
    throw FormatError(source, 5, e.what());
  }
  p.rank = header_field<std::size_t>(header, "r", source);
  p.a = std::move(bundle.records[0]);
  p.b = std::move(bundle.records[1]);
  p.w_res = std::move(bundle.records[2]);
  if (header_field<std::size_t>(header, "d_in", source) != p.d_in() ||
      header_field<std::size_t>(header, "d_out", source) != p.d_out()) {
    throw FormatError(source, 5, "header dimensions disagree with records");
  }
  try {
    p.validate();
  } catch (const DimensionMismatch& e) {
    throw FormatError(source, 5, e.what());
  }

  if (header.contains("beta") && !header["beta"].is_null()) {
    file.meta.beta = header_field<double>(header, "beta", source);
  }
  if (header.contains("seed") && !header["seed"].is_null()) {
    file.meta.seed = header_field<std::uint64_t>(header, "seed", source);
  }
  if (header.contains("warnings")) {
    for (const auto& w : header["warnings"]) {
      file.meta.warnings.push_back(
          {w.value("code", std::string()), w.value("message", std::string())});
    }
  }
  return file;
}

void save_covariance(const std::filesystem::path& path, const CovarianceMatrix& cov) {
  json header = {
      {"kind", "covariance"},
      {"dim", cov.dim()},
      {"sample_count", cov.sample_count},
      {"token_length", cov.token_length},
  };
  save_bundle(path, Bundle{header.dump(), {cov.matrix.matrix()}});
}

CovarianceMatrix load_covariance(const std::filesystem::path& path) {
  const std::string source = path.string();
  if (!starts_with_magic(path, kBundleMagic)) {
    const Matrix m = load_matrix(path);
    if (!m.is_square()) throw FormatError(source, 0, "covariance matrix " + m.shape() + " is not square");
    return CovarianceMatrix{symmetrize(m), 0, 0};
  }
  Bundle bundle = load_bundle(path);
  const json header = json::parse(bundle.header_json);
  if (header.value("kind", std::string()) != "covariance") {
    throw FormatError(source, 5, "bundle is not a covariance");
  }
  if (bundle.records.size() != 1 || !bundle.records[0].is_square()) {
    throw FormatError(source, 0, "covariance bundle needs exactly one square record");
  }
  if (header_field<std::size_t>(header, "dim", source) != bundle.records[0].rows()) {
    throw FormatError(source, 5, "header dim disagrees with record");
  }
  return CovarianceMatrix{symmetrize(bundle.records[0]),
                          header_field<std::size_t>(header, "sample_count", source),
                          header_field<std::size_t>(header, "token_length", source)};
}

void write_sweep_report(const std::filesystem::path& dir, const SweepReport& report) {
  std::filesystem::create_directories(dir);

  {
    const auto path = dir / "report.csv";
    auto out = open_output(path);
    out << "beta,seed,final_plus_loss,preservation_drift\n";
    for (const auto& r : report.records) {
      out << format_number(r.beta) << ',' << r.seed << ',' << format_number(r.final_plus_loss)
          << ',' << format_number(r.preservation_drift) << '\n';
    }
    finish(out, path);
  }
  {
    const auto path = dir / "summary.csv";
    auto out = open_output(path);
    out << "beta,seeds,mean_final_plus_loss,mean_preservation_drift,mean_containment_drift\n";
    for (const auto& s : report.summary) {
      out << format_number(s.beta) << ',' << s.seeds << ',' << format_number(s.mean_plus_loss)
          << ',' << format_number(s.mean_preservation_drift) << ','
          << format_number(s.mean_containment_drift) << '\n';
    }
    finish(out, path);
  }
  for (const auto& r : report.records) {
    const auto path =
        dir / ("trace_" + format_number(r.beta) + "_" + std::to_string(r.seed) + ".csv");
    auto out = open_output(path);
    out << "step,loss\n";
    for (std::size_t i = 0; i < r.loss_trace.size(); ++i) {
      out << i << ',' << format_number(r.loss_trace[i]) << '\n';
    }
    finish(out, path);
  }
}

}  // namespace sclora
