#pragma once

// Minimal value-semantics wrapper over MPFR.  The working precision is a
// per-thread setting (see PrecisionScope) so concurrent scans can certify at
// different precisions without touching shared state.

#include <mpfr.h>

#include <algorithm>
#include <string>
#include <utility>

namespace caustica::detail {

inline mpfr_prec_t& working_bits() {
    thread_local mpfr_prec_t bits = 256;
    return bits;
}

class PrecisionScope {
public:
    explicit PrecisionScope(long bits) : saved_(working_bits()) { working_bits() = static_cast<mpfr_prec_t>(bits); }
    ~PrecisionScope() { working_bits() = saved_; }
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    mpfr_prec_t saved_;
};

class BigFloat {
public:
    BigFloat() { mpfr_init2(v_, working_bits()); mpfr_set_zero(v_, 1); }
    BigFloat(double d) { mpfr_init2(v_, working_bits()); mpfr_set_d(v_, d, MPFR_RNDN); }
    BigFloat(int i) : BigFloat(static_cast<double>(i)) {}
    BigFloat(const BigFloat& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    BigFloat(BigFloat&& o) noexcept { mpfr_init2(v_, MPFR_PREC_MIN); mpfr_swap(v_, o.v_); }
    BigFloat& operator=(const BigFloat& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    BigFloat& operator=(BigFloat&& o) noexcept { mpfr_swap(v_, o.v_); return *this; }
    ~BigFloat() { mpfr_clear(v_); }

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    // Decimal text with enough digits to round-trip at this precision.
    std::string to_string() const {
        char* buf = nullptr;
        int digits = static_cast<int>(mpfr_get_prec(v_) * 0.30103) + 3;
        mpfr_asprintf(&buf, "%.*Re", digits, v_);
        std::string out(buf);
        mpfr_free_str(buf);
        return out;
    }
    static BigFloat from_string(const std::string& text) {
        BigFloat r;
        mpfr_set_str(r.v_, text.c_str(), 10, MPFR_RNDN);
        return r;
    }
    mpfr_ptr raw() { return v_; }
    mpfr_srcptr raw() const { return v_; }

#define CAUSTICA_BF_BINOP(op, fn)                                              \
    friend BigFloat operator op(const BigFloat& a, const BigFloat& b) {        \
        BigFloat r(blank_tag{}, std::max(mpfr_get_prec(a.v_), mpfr_get_prec(b.v_))); \
        fn(r.v_, a.v_, b.v_, MPFR_RNDN);                                       \
        return r;                                                              \
    }                                                                          \
    friend BigFloat operator op(const BigFloat& a, double b) { return a op BigFloat(b); } \
    friend BigFloat operator op(double a, const BigFloat& b) { return BigFloat(a) op b; } \
    BigFloat& operator op##=(const BigFloat& b) { return *this = *this op b; }
    CAUSTICA_BF_BINOP(+, mpfr_add)
    CAUSTICA_BF_BINOP(-, mpfr_sub)
    CAUSTICA_BF_BINOP(*, mpfr_mul)
    CAUSTICA_BF_BINOP(/, mpfr_div)
#undef CAUSTICA_BF_BINOP

    BigFloat operator-() const {
        BigFloat r(*this);
        mpfr_neg(r.v_, r.v_, MPFR_RNDN);
        return r;
    }

    friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_less_p(a.v_, b.v_); }
    friend bool operator>(const BigFloat& a, const BigFloat& b) { return mpfr_greater_p(a.v_, b.v_); }
    friend bool operator<=(const BigFloat& a, const BigFloat& b) { return mpfr_lessequal_p(a.v_, b.v_); }
    friend bool operator==(const BigFloat& a, const BigFloat& b) { return mpfr_equal_p(a.v_, b.v_); }
    friend bool operator!=(const BigFloat& a, const BigFloat& b) { return !(a == b); }
    friend bool operator<(const BigFloat& a, double b) { return mpfr_cmp_d(a.v_, b) < 0; }
    friend bool operator>(const BigFloat& a, double b) { return mpfr_cmp_d(a.v_, b) > 0; }
    friend bool operator<=(const BigFloat& a, double b) { return mpfr_cmp_d(a.v_, b) <= 0; }
    friend bool operator!=(const BigFloat& a, double b) { return mpfr_cmp_d(a.v_, b) != 0; }

#define CAUSTICA_BF_UNARY(name, fn)              \
    friend BigFloat name(const BigFloat& a) {    \
        BigFloat r(blank_tag{}, mpfr_get_prec(a.v_)); \
        fn(r.v_, a.v_, MPFR_RNDN);               \
        return r;                                \
    }
    CAUSTICA_BF_UNARY(sqrt, mpfr_sqrt)
    CAUSTICA_BF_UNARY(abs, mpfr_abs)
    CAUSTICA_BF_UNARY(cos, mpfr_cos)
    CAUSTICA_BF_UNARY(sin, mpfr_sin)
    CAUSTICA_BF_UNARY(acos, mpfr_acos)
#undef CAUSTICA_BF_UNARY

    friend BigFloat atan2(const BigFloat& y, const BigFloat& x) {
        BigFloat r(blank_tag{}, std::max(mpfr_get_prec(y.v_), mpfr_get_prec(x.v_)));
        mpfr_atan2(r.v_, y.v_, x.v_, MPFR_RNDN);
        return r;
    }
    static BigFloat pi() {
        BigFloat r;
        mpfr_const_pi(r.v_, MPFR_RNDN);
        return r;
    }

private:
    struct blank_tag {};
    BigFloat(blank_tag, mpfr_prec_t bits) { mpfr_init2(v_, bits); }
    mpfr_t v_;
};

}  // namespace caustica::detail
