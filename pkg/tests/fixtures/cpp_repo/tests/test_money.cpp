#include <cassert>

#include "shop/format.hpp"

void test_add_money() {
    shop::Money a{shop::to_cents(2, 5)};
    shop::Money b{95};
    shop::Money c = shop::add(a, b);
    assert(c.cents == 300);
    assert(shop::format_money(c) == "3.0");
}

int main() {
    test_add_money();
    return 0;
}
