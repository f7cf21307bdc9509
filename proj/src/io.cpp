#include "hardball/io.hpp"

#include "hardball/errors.hpp"

#include <cstdio>
#include <sstream>
#include <vector>

namespace hardball {

std::string fmt_real(Real x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", x);
  return buf;
}

std::string fmt_vec(const Eigen::Ref<const Vec>& v) {
  std::string out;
  for (Index k = 0; k < v.size(); ++k) {
    if (k) out += ' ';
    out += fmt_real(v[k]);
  }
  return out;
}

std::string fmt_ball_array(const BallArray& a) { return fmt_vec(flat(a)); }

Vec parse_vec(const std::string& text, Index expect) {
  std::istringstream in(text);
  std::vector<Real> vals;
  Real x;
  while (in >> x) vals.push_back(x);
  if (!in.eof()) throw ConfigError("malformed numeric list: '" + text + "'");
  if (expect >= 0 && static_cast<Index>(vals.size()) != expect)
    throw ConfigError("numeric list has wrong length: '" + text + "'");
  return Eigen::Map<const Vec>(vals.data(), static_cast<Index>(vals.size()));
}

}  // namespace hardball
