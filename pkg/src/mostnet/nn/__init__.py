from .module import Conv2d, Module, parameter
