# -*- coding: utf-8 -*-
from setuptools import setup

package_dir = {"": "src"}

packages = [
    "mostnet",
    "mostnet.core",
    "mostnet.data",
    "mostnet.evaluation",
    "mostnet.losses",
    "mostnet.networks",
    "mostnet.nn",
    "mostnet.training",
]

package_data = {"": ["*"]}

install_requires = [
    "numpy>=1.20,<2.0",
    "pillow>=8.0",
    "rich>=12.0",
    "scipy>=1.6,<2.0",
    "tqdm>=4.60,<5.0",
]

entry_points = {"console_scripts": ["mostnet = mostnet.cli:main"]}

setup_kwargs = {
    "name": "mostnet",
    "version": "0.1.0",
    "description": "Memory oriented style transfer from photos to sketches",
    "long_description": "# MOSTNet\n\nPhoto to sketch translation with a key/value memory of sketch features, trained as a conditional GAN on numpy.\n\nSee README.md for usage.\n",
    "author": "Aleksei Shabashov",
    "author_email": "a.shabashov@iterrf.ru",
    "maintainer": "None",
    "maintainer_email": "None",
    "url": "None",
    "package_dir": package_dir,
    "packages": packages,
    "package_data": package_data,
    "install_requires": install_requires,
    "entry_points": entry_points,
    "python_requires": ">=3.8,<4.0",
}


setup(**setup_kwargs)
