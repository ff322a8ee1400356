#pragma once
#include <functional>

#include "rfou/grid.hpp"
#include "rfou/parallel.hpp"

namespace rfou::fraccalc {

// Riemann-Liouville integral I_{0+}^order f on [0,T], order in (0,2).
// Product integration: f is treated as piecewise linear on each cell and the
// weight (t-s)^(order-1) is integrated in closed form, so the endpoint
// singularity is never sampled. Orders in (1,2) compose as I^1 ∘ I^(order-1).
SampledFn frac_integral_left(const SampledFn& f, double order, exec policy = exec::openmp);

// Right-sided integral anchored at T, order in (0,1). Real-valued: the
// complex phase (-1)^(-order) of the textbook definition is dropped.
SampledFn frac_integral_right(const SampledFn& f, double order, exec policy = exec::openmp);

// Marchaud-form fractional derivative D_{0+}^order, order in (0,1):
//   (1/Gamma(1-a)) [ f(t)/t^a + a * int_0^t (f(t)-f(s))/(t-s)^(a+1) ds ]
// with the difference integral product-integrated (f piecewise linear).
// Node 0: 0 when f(0)=0, otherwise the singular first term evaluated at t_1.
SampledFn frac_derivative_left(const SampledFn& f, double order, exec policy = exec::openmp);

// Mirror of the left derivative anchored at T, phase dropped.
SampledFn frac_derivative_right(const SampledFn& f, double order, exec policy = exec::openmp);

// Young integral int_0^T f dg = int_0^T D_{0+}^order f * D_{T-}^(1-order) g_{T-} dt,
// g_{T-} = g - g(T), by trapezoidal summation of the two operator outputs.
double young_integral(const SampledFn& f, const SampledFn& g, double order);

// Weighted variants computing Op(u^wexp * f(u))(t) with the power factor u^wexp
// integrated exactly against the singular weight on the first cell, where a
// chord of u^wexp*f is meaningless (wexp<0 diverges, wexp>0 has infinite slope).
// Substrate for the kernel inverse K_H^{-1} and the sufficient statistic.
SampledFn frac_integral_left_weighted(const SampledFn& f, double wexp, double order,
                                      exec policy = exec::openmp);
SampledFn frac_derivative_left_weighted(const SampledFn& f, double wexp, double order,
                                        exec policy = exec::openmp);

// Least-squares slope of log max-oscillation vs log lag over dyadic lags.
// Crude but enough to reject blatantly inadmissible Young-integral calls.
double discrete_holder_exponent(const SampledFn& f);

namespace detail {
// int_a^b F(s) ds where F ~ (s-a)^{e_left} near a and (b-s)^{e_right} near b,
// via power substitutions that flatten the endpoint behavior, then Gauss-Legendre.
double singular_cell_integral(double a, double b, double e_left, double e_right,
                              const std::function<double(double)>& F);
} // namespace detail

} // namespace rfou::fraccalc
