#pragma once

#include "cart.hpp"

namespace shop {

const int kPercentCap = 50;

Money apply_discount(const Cart& cart, int percent);

}  // namespace shop
