#include "shop/cart.hpp"

namespace shop {

int g_cart_count = 0;

void Cart::add(const Item& item, int qty) {
    items_.push_back(item);
    qty_.push_back(qty);
    g_cart_count += qty;
}

Money Cart::total() const {
    Money sum{0};
    for (int i = 0; i < count(); ++i) {
        sum = shop::add(sum, scale(items_[i].price(), qty_[i] * 100));
    }
    return sum;
}

int Cart::count() const {
    return static_cast<int>(items_.size());
}

}  // namespace shop
