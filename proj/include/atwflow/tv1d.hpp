#pragma once

#include <vector>

namespace atw {

// Exact solver for the chain problem
//
//   min_x  sum_t 1/2 (x_t - v_t)^2 + lam * sum_edges [a D^+ + b D^-],
//   D = x_{t+1} - x_t,
//
// over x_0..x_{m-1}. When `left` (resp. `right`) is given, a fixed value
// x_{-1} (resp. x_m) is attached by one more edge. Dynamic programming on the
// derivative of the value function, which stays piecewise linear.
class Tv1d {
public:
    // x receives the minimizer; returns nothing else.
    void solve(int m, const double* v, double lam, double a, double b, const double* left, const double* right,
               double* x);

private:
    struct Knot {
        double x, ds, dj;  // slope change and upward jump at x
    };
    void reset(int m);
    void insert_sorted(Knot k);
    double clamp_low(double level);
    double clamp_high(double level);
    double root();

    std::vector<Knot> buf_;
    int head_ = 0, tail_ = 0;  // knots live in buf_[head_, tail_)
    double sl_ = 0, cl_ = 0;   // D(x) = sl x + cl left of all knots
    double sr_ = 0, cr_ = 0;   // D(x) = sr x + cr right of all knots
    std::vector<double> lo_, hi_;
};

}  // namespace atw
