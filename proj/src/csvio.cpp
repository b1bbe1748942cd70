#include "wrcontrol/expcli.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace wrc {

std::string format_cell(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (res.ec != std::errc()) throw std::runtime_error("format_cell: conversion failed");
  return std::string(buf, res.ptr);
}

namespace {

std::string render_cell(const CsvCell& cell) {
  if (std::holds_alternative<double>(cell)) return format_cell(std::get<double>(cell));
  const std::string& s = std::get<std::string>(cell);
  if (s.find(',') != std::string::npos || s.find('\n') != std::string::npos)
    throw std::runtime_error("emit_csv: text cell contains a separator: " + s);
  return s;
}

}  // namespace

void emit_csv(const CsvTable& table, const std::string& path) {
  for (const auto& row : table.rows)
    if (row.size() != table.header.size())
      throw std::runtime_error("emit_csv: ragged row in table for " + path);
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < table.header.size(); ++i)
    out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << render_cell(row[i]);
    out << '\n';
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("emit_csv: cannot open for writing: " + path);
  const std::string text = out.str();
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  f.flush();
  if (!f) throw std::runtime_error("emit_csv: write failed: " + path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_csv: cannot open: " + path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && f.peek() == std::ifstream::traits_type::eof()) break;
    std::vector<std::string> parts;
    std::string::size_type pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      parts.push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (first) {
      table.header = std::move(parts);
      first = false;
      continue;
    }
    std::vector<CsvCell> row;
    row.reserve(parts.size());
    for (const auto& p : parts) {
      double v = 0;
      const char* b = p.data();
      const char* e = b + p.size();
      auto res = std::from_chars(b, e, v);
      if (res.ec == std::errc() && res.ptr == e && !p.empty())
        row.emplace_back(v);
      else
        row.emplace_back(p);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace wrc
