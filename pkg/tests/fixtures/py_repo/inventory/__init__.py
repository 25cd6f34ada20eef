from .models import Product, Stock

VERSION = "1.0"
