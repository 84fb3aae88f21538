#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ybl {

// Exact rational arithmetic on __int128, used to settle sign questions
// (discriminants, bracket positivity, interval membership) without rounding.
class Rat {
public:
    Rat() : num_(0), den_(1) {}
    Rat(long long v) : num_(v), den_(1) {}
    Rat(long long n, long long d) : num_(n), den_(d) { normalize(); }

    static Rat make(__int128 n, __int128 d) {
        Rat r;
        r.num_ = n;
        r.den_ = d;
        r.normalize();
        return r;
    }

    __int128 num() const { return num_; }
    __int128 den() const { return den_; }

    friend Rat operator+(const Rat& a, const Rat& b) {
        return make(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Rat operator-(const Rat& a, const Rat& b) {
        return make(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Rat operator*(const Rat& a, const Rat& b) {
        return make(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.num_ == 0) throw std::domain_error("Rat: division by zero");
        return make(a.num_ * b.den_, a.den_ * b.num_);
    }
    Rat operator-() const { return make(-num_, den_); }

    int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }

    friend bool operator<(const Rat& a, const Rat& b) { return (a - b).sign() < 0; }
    friend bool operator>(const Rat& a, const Rat& b) { return (a - b).sign() > 0; }
    friend bool operator==(const Rat& a, const Rat& b) { return (a - b).sign() == 0; }
    friend bool operator<=(const Rat& a, const Rat& b) { return (a - b).sign() <= 0; }
    friend bool operator>=(const Rat& a, const Rat& b) { return (a - b).sign() >= 0; }

    double to_double() const {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

private:
    void normalize() {
        if (den_ == 0) throw std::domain_error("Rat: zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        __int128 g = gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    static __int128 gcd(__int128 a, __int128 b) {
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : a;
    }

    __int128 num_;
    __int128 den_;
};

} // namespace ybl
