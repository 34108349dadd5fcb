#ifndef ECSIM_MONEY_HPP
#define ECSIM_MONEY_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ecsim {

// All value is carried in integer minor currency units (cents). Accounting
// is exact: arithmetic that would overflow throws instead of wrapping.
using Money = std::int64_t;

class MoneyOverflow : public std::runtime_error {
public:
    explicit MoneyOverflow(const std::string& what) : std::runtime_error(what) {}
};

inline Money checked_add(Money a, Money b) {
    Money r;
    if (__builtin_add_overflow(a, b, &r))
        throw MoneyOverflow("money addition overflow");
    return r;
}

inline Money checked_sub(Money a, Money b) {
    Money r;
    if (__builtin_sub_overflow(a, b, &r))
        throw MoneyOverflow("money subtraction overflow");
    return r;
}

inline Money checked_mul(Money a, Money b) {
    Money r;
    if (__builtin_mul_overflow(a, b, &r))
        throw MoneyOverflow("money multiplication overflow");
    return r;
}

// floor(amount * num / den) for the proportional taint split; intermediate
// product taken in 128 bits so large balances cannot overflow.
inline Money mul_div_floor(Money amount, Money num, Money den) {
    if (den <= 0)
        throw std::invalid_argument("mul_div_floor: non-positive denominator");
    __int128 p = static_cast<__int128>(amount) * static_cast<__int128>(num);
    return static_cast<Money>(p / den);
}

} // namespace ecsim

#endif
