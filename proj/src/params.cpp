#include "extraction/params.hpp"

#include <cmath>
#include <sstream>

#include "extraction/errors.hpp"

namespace extraction {

void ModelParams::validate() const {
    std::ostringstream os;
    if (!std::isfinite(a)) os << "a must be finite; ";
    if (!(b >= 0.0) || !std::isfinite(b)) os << "b must be >= 0; ";
    if (!(sigma > 0.0) || !std::isfinite(sigma)) os << "sigma must be > 0; ";
    if (!(rho > 0.0) || !std::isfinite(rho)) os << "rho must be > 0; ";
    if (!(c > 0.0) || !std::isfinite(c)) os << "c must be > 0; ";
    if (!(alpha > 0.0) || !std::isfinite(alpha)) os << "alpha must be > 0; ";
    if (!os.str().empty()) throw DomainError("invalid model parameters: " + os.str());
}

std::string ModelParams::describe() const {
    std::ostringstream os;
    os << "a=" << a << " b=" << b << " sigma=" << sigma << " rho=" << rho << " c=" << c
       << " alpha=" << alpha;
    return os.str();
}

void QuadratureSpec::validate() const {
    if (!(rel_tol > 0.0)) throw DomainError("quadrature rel_tol must be > 0");
    if (!(abs_tol >= 0.0)) throw DomainError("quadrature abs_tol must be >= 0");
    if (max_subdivisions < 8) throw DomainError("quadrature max_subdivisions must be >= 8");
    if (!(split_point > 0.0)) throw DomainError("quadrature split_point must be > 0");
}

}  // namespace extraction
