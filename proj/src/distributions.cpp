#include "comove/distributions.hpp"

#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace comove::dist {

double student_t_two_sided(double t, double dof) {
  if (std::isnan(t)) return std::nan("");
  if (std::isinf(t)) return 0.0;
  boost::math::students_t d(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(d, std::abs(t)));
}

double f_upper(double f, double d1, double d2) {
  if (std::isnan(f)) return std::nan("");
  if (f <= 0) return 1.0;
  if (std::isinf(f)) return 0.0;
  boost::math::fisher_f d(d1, d2);
  return boost::math::cdf(boost::math::complement(d, f));
}

double chi_square_upper(double x, double dof) {
  if (std::isnan(x)) return std::nan("");
  if (x <= 0) return 1.0;
  if (std::isinf(x)) return 0.0;
  boost::math::chi_squared d(dof);
  return boost::math::cdf(boost::math::complement(d, x));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace comove::dist
