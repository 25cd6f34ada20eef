from .models import Product

TAX_RATE = 20


def with_tax(amount, rate=TAX_RATE):
    return amount + amount * rate // 100


def total_price(products):
    return sum(with_tax(p.price) for p in products)


def cheapest(products):
    return min(products, key=lambda p: p.price)


def make_product(sku, price):
    return Product(sku, price)
