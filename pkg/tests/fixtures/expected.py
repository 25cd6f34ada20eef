"""Hand-enumerated entities and relations for the two fixture repositories.

Keys are (kind, qualified name, path). Written from reading the fixture
sources, not from scanner output.
"""

MONEY = "include/shop/money.hpp"
ITEM = "include/shop/item.hpp"
CART_H = "include/shop/cart.hpp"
DISC_H = "include/shop/discount.hpp"
FMT = "include/shop/format.hpp"
CART_C = "src/cart.cpp"
DISC_C = "src/discount.cpp"
REPORT = "src/report.cpp"
T_CART = "tests/test_cart.cpp"
T_MONEY = "tests/test_money.cpp"


def _f(p):
    return ("file", p, p)


def _k(kind, name, path):
    return ({"c": "class", "f": "function", "m": "method", "g": "global-variable"}[kind], name, path)


# -- C++ -------------------------------------------------------------------

Money = _k("c", "shop::Money", MONEY)
to_cents = _k("f", "shop::to_cents", MONEY)
add = _k("f", "shop::add", MONEY)
scale = _k("f", "shop::scale", MONEY)
Item = _k("c", "shop::Item", ITEM)
Item_ctor = _k("m", "shop::Item::Item", ITEM)
Item_name = _k("m", "shop::Item::name", ITEM)
Item_price = _k("m", "shop::Item::price", ITEM)
count_h = _k("g", "shop::g_cart_count", CART_H)
Cart = _k("c", "shop::Cart", CART_H)
add_h = _k("m", "shop::Cart::add", CART_H)
total_h = _k("m", "shop::Cart::total", CART_H)
count_decl = _k("m", "shop::Cart::count", CART_H)
empty = _k("m", "shop::Cart::empty", CART_H)
cap = _k("g", "shop::kPercentCap", DISC_H)
fmt = _k("f", "shop::format_money", FMT)
count_c = _k("g", "shop::g_cart_count", CART_C)
add_c = _k("m", "shop::Cart::add", CART_C)
total_c = _k("m", "shop::Cart::total", CART_C)
count_def = _k("m", "shop::Cart::count", CART_C)
apply_discount = _k("f", "shop::apply_discount", DISC_C)
summary = _k("f", "shop::summary", REPORT)
t_total = _k("f", "test_cart_total", T_CART)
t_disc = _k("f", "test_discount", T_CART)
main_cart = _k("f", "main", T_CART)
t_money = _k("f", "test_add_money", T_MONEY)
main_money = _k("f", "main", T_MONEY)

CPP_FILES = [MONEY, ITEM, CART_H, DISC_H, FMT, CART_C, DISC_C, REPORT, T_CART, T_MONEY]

CPP_ENTITIES = {_f(p) for p in CPP_FILES} | {
    Money, to_cents, add, scale, Item, Item_ctor, Item_name, Item_price,
    count_h, Cart, add_h, total_h, count_decl, empty, cap, fmt,
    count_c, add_c, total_c, count_def, apply_discount, summary,
    t_total, t_disc, main_cart, t_money, main_money,
}

CPP_RELATIONS = {
    ("include", _f(ITEM), _f(MONEY)),
    ("include", _f(CART_H), _f(ITEM)),
    ("include", _f(DISC_H), _f(CART_H)),
    ("include", _f(FMT), _f(MONEY)),
    ("include", _f(CART_C), _f(CART_H)),
    ("include", _f(DISC_C), _f(DISC_H)),
    ("include", _f(REPORT), _f(CART_H)),
    ("include", _f(REPORT), _f(FMT)),
    ("include", _f(T_CART), _f(CART_H)),
    ("include", _f(T_CART), _f(DISC_H)),
    ("include", _f(T_MONEY), _f(FMT)),
    ("contain", _f(MONEY), Money),
    ("contain", _f(MONEY), to_cents),
    ("contain", _f(MONEY), add),
    ("contain", _f(MONEY), scale),
    ("contain", _f(ITEM), Item),
    ("contain", Item, Item_ctor),
    ("contain", Item, Item_name),
    ("contain", Item, Item_price),
    ("contain", _f(CART_H), count_h),
    ("contain", _f(CART_H), Cart),
    ("contain", Cart, add_h),
    ("contain", Cart, total_h),
    ("contain", Cart, count_decl),
    ("contain", Cart, empty),
    ("contain", _f(DISC_H), cap),
    ("contain", _f(FMT), fmt),
    ("contain", _f(CART_C), count_c),
    ("contain", _f(CART_C), add_c),
    ("contain", _f(CART_C), total_c),
    ("contain", _f(CART_C), count_def),
    ("contain", _f(DISC_C), apply_discount),
    ("contain", _f(REPORT), summary),
    ("contain", _f(T_CART), t_total),
    ("contain", _f(T_CART), t_disc),
    ("contain", _f(T_CART), main_cart),
    ("contain", _f(T_MONEY), t_money),
    ("contain", _f(T_MONEY), main_money),
    # inline bodies
    ("reference", add, Money),
    ("reference", scale, Money),
    ("call", empty, count_decl),
    ("call", empty, count_def),
    # cart.cpp
    ("reference", add_c, count_c),
    ("reference", total_c, Money),
    ("call", total_c, count_def),
    ("call", total_c, add),
    ("call", total_c, scale),
    ("call", total_c, Item_price),
    # discount.cpp
    ("reference", apply_discount, cap),
    ("call", apply_discount, scale),
    ("call", apply_discount, total_h),
    ("call", apply_discount, total_c),
    # report.cpp
    ("call", summary, empty),
    ("call", summary, count_decl),
    ("call", summary, count_def),
    ("call", summary, total_h),
    ("call", summary, total_c),
    ("call", summary, fmt),
    # tests
    ("reference", t_total, Cart),
    ("reference", t_total, Money),
    ("call", t_total, add_h),
    ("call", t_total, add_c),
    ("call", t_total, Item),
    ("call", t_total, to_cents),
    ("call", t_total, count_decl),
    ("call", t_total, count_def),
    ("call", t_total, total_h),
    ("call", t_total, total_c),
    ("reference", t_disc, Cart),
    ("reference", t_disc, Money),
    ("call", t_disc, add_h),
    ("call", t_disc, add_c),
    ("call", t_disc, Item),
    ("call", t_disc, to_cents),
    ("call", t_disc, apply_discount),
    ("call", main_cart, t_total),
    ("call", main_cart, t_disc),
    ("reference", t_money, Money),
    ("call", t_money, to_cents),
    ("call", t_money, add),
    ("call", t_money, fmt),
    ("call", main_money, t_money),
}

# -- Python ------------------------------------------------------------------

INIT = "inventory/__init__.py"
ERRORS = "inventory/errors.py"
MODELS = "inventory/models.py"
PRICING = "inventory/pricing.py"
WAREHOUSE = "inventory/warehouse.py"
PREPORT = "inventory/report.py"
CLI = "cli.py"
T_PRICING = "tests/test_pricing.py"
T_WH = "tests/test_warehouse.py"

VERSION = _k("g", "inventory.VERSION", INIT)
InvErr = _k("c", "inventory.errors.InventoryError", ERRORS)
OOS = _k("c", "inventory.errors.OutOfStock", ERRORS)
OOS_init = _k("m", "inventory.errors.OutOfStock.__init__", ERRORS)
CURRENCY = _k("g", "inventory.models.DEFAULT_CURRENCY", MODELS)
Product = _k("c", "inventory.models.Product", MODELS)
label = _k("m", "inventory.models.Product.label", MODELS)
Stock = _k("c", "inventory.models.Stock", MODELS)
Stock_init = _k("m", "inventory.models.Stock.__init__", MODELS)
put = _k("m", "inventory.models.Stock.put", MODELS)
take = _k("m", "inventory.models.Stock.take", MODELS)
level = _k("m", "inventory.models.Stock.level", MODELS)
TAX = _k("g", "inventory.pricing.TAX_RATE", PRICING)
with_tax = _k("f", "inventory.pricing.with_tax", PRICING)
total_price = _k("f", "inventory.pricing.total_price", PRICING)
cheapest = _k("f", "inventory.pricing.cheapest", PRICING)
make_product = _k("f", "inventory.pricing.make_product", PRICING)
MAX = _k("g", "inventory.warehouse.MAX_SKUS", WAREHOUSE)
Warehouse = _k("c", "inventory.warehouse.Warehouse", WAREHOUSE)
wh_init = _k("m", "inventory.warehouse.Warehouse.__init__", WAREHOUSE)
receive = _k("m", "inventory.warehouse.Warehouse.receive", WAREHOUSE)
value = _k("m", "inventory.warehouse.Warehouse.value", WAREHOUSE)
summarize = _k("f", "inventory.report.summarize", PREPORT)
cli_main = _k("f", "cli.main", CLI)
t_tax = _k("f", "tests.test_pricing.test_with_tax_default_rate", T_PRICING)
t_cheap = _k("f", "tests.test_pricing.test_total_and_cheapest", T_PRICING)
t_recv = _k("f", "tests.test_warehouse.test_receive_tracks_levels", T_WH)

PY_FILES = [INIT, ERRORS, MODELS, PRICING, WAREHOUSE, PREPORT, CLI, T_PRICING, T_WH]

PY_ENTITIES = {_f(p) for p in PY_FILES} | {
    VERSION, InvErr, OOS, OOS_init, CURRENCY, Product, label, Stock, Stock_init,
    put, take, level, TAX, with_tax, total_price, cheapest, make_product,
    MAX, Warehouse, wh_init, receive, value, summarize, cli_main, t_tax, t_cheap, t_recv,
}

PY_RELATIONS = {
    ("dependency", _f(INIT), _f(MODELS)),
    ("dependency", _f(MODELS), _f(ERRORS)),
    ("dependency", _f(PRICING), _f(MODELS)),
    ("dependency", _f(WAREHOUSE), _f(PRICING)),
    ("dependency", _f(WAREHOUSE), _f(MODELS)),
    ("dependency", _f(PREPORT), _f(PRICING)),
    ("dependency", _f(PREPORT), _f(WAREHOUSE)),
    ("dependency", _f(CLI), _f(MODELS)),
    ("dependency", _f(CLI), _f(PREPORT)),
    ("dependency", _f(CLI), _f(WAREHOUSE)),
    ("dependency", _f(T_PRICING), _f(MODELS)),
    ("dependency", _f(T_PRICING), _f(PRICING)),
    ("dependency", _f(T_WH), _f(INIT)),
    ("dependency", _f(T_WH), _f(WAREHOUSE)),
    ("contain", _f(INIT), VERSION),
    ("contain", _f(ERRORS), InvErr),
    ("contain", _f(ERRORS), OOS),
    ("contain", OOS, OOS_init),
    ("contain", _f(MODELS), CURRENCY),
    ("contain", _f(MODELS), Product),
    ("contain", Product, label),
    ("contain", _f(MODELS), Stock),
    ("contain", Stock, Stock_init),
    ("contain", Stock, put),
    ("contain", Stock, take),
    ("contain", Stock, level),
    ("contain", _f(PRICING), TAX),
    ("contain", _f(PRICING), with_tax),
    ("contain", _f(PRICING), total_price),
    ("contain", _f(PRICING), cheapest),
    ("contain", _f(PRICING), make_product),
    ("contain", _f(WAREHOUSE), MAX),
    ("contain", _f(WAREHOUSE), Warehouse),
    ("contain", Warehouse, wh_init),
    ("contain", Warehouse, receive),
    ("contain", Warehouse, value),
    ("contain", _f(PREPORT), summarize),
    ("contain", _f(CLI), cli_main),
    ("contain", _f(T_PRICING), t_tax),
    ("contain", _f(T_PRICING), t_cheap),
    ("contain", _f(T_WH), t_recv),
    ("reference", OOS, InvErr),
    ("reference", Product, CURRENCY),
    ("call", put, level),
    ("call", take, level),
    ("call", take, OOS),
    ("reference", with_tax, TAX),
    ("call", total_price, with_tax),
    ("call", make_product, Product),
    ("call", wh_init, Stock),
    ("reference", receive, MAX),
    ("call", receive, put),
    ("call", value, total_price),
    ("call", value, level),
    ("reference", summarize, Warehouse),
    ("call", summarize, value),
    ("call", summarize, with_tax),
    ("call", cli_main, Warehouse),
    ("call", cli_main, receive),
    ("call", cli_main, Product),
    ("call", cli_main, summarize),
    ("call", t_tax, with_tax),
    ("call", t_cheap, make_product),
    ("call", t_cheap, Product),
    ("call", t_cheap, total_price),
    ("call", t_cheap, cheapest),
    ("call", t_recv, Warehouse),
    ("call", t_recv, receive),
    ("call", t_recv, Product),
    ("call", t_recv, level),
    ("call", t_recv, value),
}
