class InventoryError(Exception):
    pass


class OutOfStock(InventoryError):
    def __init__(self, sku):
        super().__init__(f"out of stock: {sku}")
        self.sku = sku
