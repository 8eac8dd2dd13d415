"""
Синтез импульсов гейта CNOT на ридберговских атомах обучением с подкреплением
"""
__version__ = "0.1.0"
