import sys

from inventory.models import Product
from inventory.report import summarize
from inventory.warehouse import Warehouse


def main(argv=None):
    argv = argv or sys.argv[1:]
    wh = Warehouse("main")
    for arg in argv:
        sku, price = arg.split("=")
        wh.receive(Product(sku, int(price)), 1)
    print(summarize(wh))
    return 0


if __name__ == "__main__":
    sys.exit(main())
