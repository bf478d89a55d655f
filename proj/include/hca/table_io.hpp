#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "hca/errors.hpp"

// Whitespace-token reader shared by the plain-text table formats.
namespace hca::table_io {

class TokenReader {
 public:
  explicit TokenReader(std::istream& is) : is_(is) {}

  std::string word() {
    std::string tok;
    while (is_ >> tok) {
      if (!tok.empty() && tok[0] == '#') {
        std::string rest;
        std::getline(is_, rest);
        continue;
      }
      return tok;
    }
    throw ConfigError("unexpected end of table file");
  }

  void expect(const std::string& key) {
    const std::string tok = word();
    if (tok != key) throw ConfigError("expected '" + key + "' but found '" + tok + "'");
  }

  double number() {
    const std::string tok = word();
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw ConfigError("malformed number '" + tok + "'");
      return v;
    } catch (const std::logic_error&) {
      throw ConfigError("malformed number '" + tok + "'");
    }
  }

  int integer() {
    const double v = number();
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) throw ConfigError("expected an integer");
    return i;
  }

  int keyed_int(const std::string& key) {
    expect(key);
    return integer();
  }

  double keyed_double(const std::string& key) {
    expect(key);
    return number();
  }

  std::vector<double> doubles(std::size_t n) {
    std::vector<double> out(n);
    for (double& x : out) x = number();
    return out;
  }

 private:
  std::istream& is_;
};

inline void write_rows(std::ostream& os, const std::vector<double>& values, int row_length) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    os << values[i];
    os << (((i + 1) % static_cast<std::size_t>(row_length)) == 0 ? '\n' : ' ');
  }
}

}  // namespace hca::table_io
