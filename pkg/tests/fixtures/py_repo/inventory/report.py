import inventory.pricing as pr
from .warehouse import Warehouse


def summarize(warehouse: Warehouse) -> str:
    total = warehouse.value()
    return f"{warehouse.name}: {pr.with_tax(total)}"
