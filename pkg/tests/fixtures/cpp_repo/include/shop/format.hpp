#pragma once

#include <string>

#include "money.hpp"

namespace shop {

inline std::string format_money(Money m) {
    return std::to_string(m.cents / 100) + "." + std::to_string(m.cents % 100);
}

}  // namespace shop
