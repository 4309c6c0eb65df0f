#include "gfolio/ohlcv.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gfolio {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, const std::string& column, int line_no) {
  try {
    size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw data_error("line " + std::to_string(line_no) + ": malformed " + column + " value '" +
                     text + "'");
  }
}

void check_bar(const OhlcvBar& bar, const std::string& where) {
  if (!(bar.open > 0 && bar.high > 0 && bar.low > 0 && bar.close > 0)) {
    throw data_error(where + ": prices must be positive on " + bar.date.str());
  }
  if (bar.high < std::max(bar.open, bar.close)) {
    throw data_error(where + ": high < max(open, close) on " + bar.date.str());
  }
  if (bar.low > std::min(bar.open, bar.close)) {
    throw data_error(where + ": low > min(open, close) on " + bar.date.str());
  }
  if (bar.volume < 0) {
    throw data_error(where + ": negative volume on " + bar.date.str());
  }
}

}  // namespace

void OhlcvSeries::validate() const {
  const std::string where = "series '" + asset_id + "'";
  for (size_t i = 0; i < rows.size(); ++i) {
    check_bar(rows[i], where);
    if (i > 0 && !(rows[i - 1].date < rows[i].date)) {
      throw data_error(where + ": dates not strictly increasing at " + rows[i].date.str());
    }
  }
}

OhlcvSeries load_csv(const std::string& path, const std::string& asset_id) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open '" + path + "'");

  OhlcvSeries series;
  series.asset_id = asset_id.empty() ? std::filesystem::path(path).stem().string() : asset_id;
  const std::string where = "'" + path + "'";

  std::string line;
  if (!std::getline(in, line)) throw data_error(where + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "date,open,high,low,close,volume") {
    throw data_error(where + ": expected header 'date,open,high,low,close,volume', got '" + line +
                     "'");
  }

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 6) {
      throw data_error(where + ": line " + std::to_string(line_no) + ": expected 6 columns, got " +
                       std::to_string(fields.size()));
    }
    OhlcvBar bar;
    try {
      bar.date = Date::parse(fields[0]);
    } catch (const data_error& e) {
      throw data_error(where + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    bar.open = parse_number(fields[1], "open", line_no);
    bar.high = parse_number(fields[2], "high", line_no);
    bar.low = parse_number(fields[3], "low", line_no);
    bar.close = parse_number(fields[4], "close", line_no);
    bar.volume = parse_number(fields[5], "volume", line_no);
    try {
      check_bar(bar, where);
    } catch (const data_error& e) {
      throw data_error(std::string(e.what()) + " (line " + std::to_string(line_no) + ")");
    }
    if (!series.rows.empty() && !(series.rows.back().date < bar.date)) {
      throw data_error(where + ": line " + std::to_string(line_no) +
                       ": dates must be strictly increasing, got " + bar.date.str() + " after " +
                       series.rows.back().date.str());
    }
    series.rows.push_back(bar);
  }
  return series;
}

void write_csv(const std::string& path, const OhlcvSeries& series) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write '" + path + "'");
  out << "date,open,high,low,close,volume\n";
  char buf[256];
  for (const auto& bar : series.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", bar.date.str().c_str(),
                  bar.open, bar.high, bar.low, bar.close, bar.volume);
    out << buf;
  }
}

}  // namespace gfolio
