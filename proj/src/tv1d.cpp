#include "atwflow/tv1d.hpp"

#include <algorithm>

namespace atw {

void Tv1d::reset(int m)
{
    const int cap = 2 * m + 8;
    if (int(buf_.size()) < cap) buf_.resize(cap);
    head_ = tail_ = m + 4;
    if (int(lo_.size()) < m) {
        lo_.resize(m);
        hi_.resize(m);
    }
}

void Tv1d::insert_sorted(Knot k)
{
    // applied to both end forms: the right form picks up the knot's change
    sr_ += k.ds;
    cr_ += k.dj - k.ds * k.x;
    int pos = tail_;
    while (pos > head_ && buf_[pos - 1].x > k.x) --pos;
    if (tail_ == int(buf_.size())) buf_.resize(buf_.size() * 2);
    for (int i = tail_; i > pos; --i) buf_[i] = buf_[i - 1];
    buf_[pos] = k;
    ++tail_;
}

// Replaces D by max(D, level) and returns where D crosses level.
double Tv1d::clamp_low(double level)
{
    double s = sl_, c = cl_;
    double at = 0, dj = 0;
    bool found = false;
    while (head_ < tail_) {
        const Knot& k = buf_[head_];
        if (s * k.x + c >= level) {
            at = (level - c) / s;
            found = true;
            break;
        }
        s += k.ds;
        c += k.dj - k.ds * k.x;
        const double kx = k.x;
        ++head_;
        if (s * kx + c >= level) {
            at = kx;
            dj = s * kx + c - level;
            found = true;
            break;
        }
    }
    if (!found) at = (level - c) / s;
    sl_ = 0;
    cl_ = level;
    buf_[--head_] = Knot{at, s, dj};
    return at;
}

// Replaces D by min(D, level) and returns where D crosses level.
double Tv1d::clamp_high(double level)
{
    double s = sr_, c = cr_;
    double at = 0, dj = 0;
    bool found = false;
    while (head_ < tail_) {
        const Knot& k = buf_[tail_ - 1];
        if (s * k.x + c <= level) {
            at = (level - c) / s;
            found = true;
            break;
        }
        s -= k.ds;
        c -= k.dj - k.ds * k.x;
        const double kx = k.x;
        --tail_;
        if (s * kx + c <= level) {
            at = kx;
            dj = level - (s * kx + c);
            found = true;
            break;
        }
    }
    if (!found) at = (level - c) / s;
    sr_ = 0;
    cr_ = level;
    buf_[tail_++] = Knot{at, -s, dj};
    return at;
}

double Tv1d::root()
{
    double s = sl_, c = cl_;
    for (int i = head_; i < tail_; ++i) {
        const Knot& k = buf_[i];
        if (s * k.x + c >= 0) return -c / s;
        s += k.ds;
        c += k.dj - k.ds * k.x;
        if (s * k.x + c >= 0) return k.x;
    }
    return -c / s;
}

void Tv1d::solve(int m, const double* v, double lam, double a, double b, const double* left, const double* right,
                 double* x)
{
    if (m <= 0) return;
    reset(m);
    const double ha = lam * a, hb = lam * b;
    sl_ = sr_ = 1;
    cl_ = cr_ = -v[0];
    if (left) {
        // lam [a (x - L)^+ + b (x - L)^-]
        cl_ -= hb;
        cr_ -= hb;
        insert_sorted(Knot{*left, 0.0, ha + hb});
    }
    for (int t = 0;; ++t) {
        if (t == m - 1 && right) {
            // lam [a (R - x)^+ + b (R - x)^-]
            cl_ -= ha;
            cr_ -= ha;
            insert_sorted(Knot{*right, 0.0, ha + hb});
        }
        if (t == m - 1) break;
        lo_[t] = clamp_low(-hb);
        hi_[t] = clamp_high(ha);
        sl_ += 1;
        cl_ -= v[t + 1];
        sr_ += 1;
        cr_ -= v[t + 1];
    }
    x[m - 1] = root();
    for (int t = m - 2; t >= 0; --t) x[t] = std::clamp(x[t + 1], lo_[t], hi_[t]);
}

}  // namespace atw
