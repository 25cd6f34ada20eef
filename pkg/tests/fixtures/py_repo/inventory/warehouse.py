from inventory import pricing
from inventory.models import Stock

MAX_SKUS = 100


class Warehouse:
    def __init__(self, name):
        self.name = name
        self.stock = Stock()
        self.catalog = {}

    def receive(self, product, qty):
        if len(self.catalog) >= MAX_SKUS:
            raise ValueError("warehouse full")
        self.catalog[product.sku] = product
        self.stock.put(product.sku, qty)

    def value(self):
        return pricing.total_price(
            p for p in self.catalog.values() for _ in range(self.stock.level(p.sku))
        )
