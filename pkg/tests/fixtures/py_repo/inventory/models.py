from dataclasses import dataclass

from .errors import OutOfStock

DEFAULT_CURRENCY = "EUR"


@dataclass
class Product:
    sku: str
    price: int
    currency: str = DEFAULT_CURRENCY

    def label(self):
        return f"{self.sku} ({self.price} {self.currency})"


class Stock:
    def __init__(self):
        self.levels = {}

    def put(self, sku, qty=1):
        self.levels[sku] = self.level(sku) + qty

    def take(self, sku, qty):
        if self.level(sku) < qty:
            raise OutOfStock(sku)
        self.levels[sku] -= qty

    def level(self, sku):
        return self.levels.get(sku, 0)
